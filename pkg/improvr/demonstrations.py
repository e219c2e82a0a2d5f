# improvr.demonstrations.py
"""Loads demonstration traces, cuts them into one-object action segments and
extracts the relative poses that the intention and action models learn from.

Two file layouts are accepted.  Raw traces::

    {"objects":[{"id":"lid", "shape":{"box":[hx, hy, hz]}}, ...],
     "frames":[{"t":0.0, "poses":{"lid":POSE, ...}, "hand":POSE|null}, ...]}

and pre-segmented demonstrations::

    {"segments":[{"object":"lid", "start":{...}, "end":{...},
                  "path":[POSE, ...]}, ...],
     "final":{...}}

where ``POSE`` is ``{"t":[x,y,z], "q":[w,x,y,z]}``.
"""
import logging, json, itertools
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from improvr.exceptions import DemoError, AmbiguousCoMovement
from improvr.geometry import Pose, WorldState, relative_pose, rotation_angle

logger = logging.getLogger(__name__)

# rotation counts as motion through a lever arm of this many meters
ROTATION_LEVER = 0.1

EPS_STATIC_T = 0.005
EPS_STATIC_R = 0.035

# ============================================================================
# Data Types
# ============================================================================

@dataclass(frozen=True)
class Frame:
    timestamp: float
    state: WorldState
    hand: Optional[Pose] = None


@dataclass(frozen=True)
class RawDemo:
    frames: tuple
    shapes: dict = field(default_factory=dict)
    source: Optional[str] = None

    @property
    def ids(self):
        return self.frames[0].state.ids


@dataclass(frozen=True)
class ActionSegment:
    """One manipulation of ``object_id``: the state when it was grasped, the
    state after it was released and the object's path in between."""
    object_id: str
    start_state: WorldState
    end_state: WorldState
    path: tuple
    start_frame: Optional[int] = None
    end_frame: Optional[int] = None


@dataclass(frozen=True)
class SegmentedDemo:
    segments: tuple
    final_state: WorldState
    shapes: dict = field(default_factory=dict)
    source: Optional[str] = None


@dataclass(frozen=True)
class TaskDemoSet:
    demos: tuple
    object_ids: tuple
    shapes: dict = field(default_factory=dict)

    @property
    def N(self):
        return len(self.demos)

# ============================================================================
# Loading
# ============================================================================

def _parse_shapes(data, path):
    shapes = {}
    for entry in data.get('objects', []):
        try:
            extents = entry.get('shape', entry).get('box')
            shapes[str(entry['id'])] = tuple(float(v) for v in extents)
        except (KeyError, TypeError, AttributeError, ValueError):
            raise DemoError('malformed object entry %r' % (entry, ), path)

    return shapes


def _parse_state(data, path, frame=None):
    try:
        return WorldState.from_json(data)
    except (ValueError, TypeError, KeyError) as e:
        raise DemoError('malformed poses: %s' % e, path, frame)


def _parse_frames(data, path):
    frames = []
    ids = None
    for index, entry in enumerate(data['frames']):
        try:
            timestamp = float(entry['t'])
            hand = entry.get('hand')
            hand = Pose.from_json(hand) if hand is not None else None
        except (KeyError, TypeError, ValueError) as e:
            raise DemoError('malformed frame: %s' % e, path, index)

        state = _parse_state(entry.get('poses'), path, index)
        if frames and timestamp <= frames[-1].timestamp:
            raise DemoError('timestamps must be strictly increasing', path,
                index)

        if ids is None:
            ids = set(state.ids)
        elif set(state.ids) != ids:
            raise DemoError('inconsistent object set', path, index)

        frames.append(Frame(timestamp, state, hand))

    if not frames:
        raise DemoError('empty demonstration', path)

    return RawDemo(tuple(frames), _parse_shapes(data, path), path)


def _parse_segments(data, path):
    segments = []
    for index, entry in enumerate(data['segments']):
        try:
            object_id = str(entry['object'])
            start = _parse_state(entry['start'], path)
            end = _parse_state(entry['end'], path)
            poses = entry.get('path') or []
            route = [Pose.from_json(p) for p in poses]
        except (KeyError, TypeError, ValueError) as e:
            raise DemoError('malformed segment %s: %s' % (index, e), path)

        if object_id not in start or object_id not in end:
            raise DemoError('segment %s manipulates unknown object %s' % (
                index, object_id), path)

        if not route:
            route = [start[object_id], end[object_id]]

        segments.append(ActionSegment(object_id, start, end, tuple(route)))

    if 'final' in data:
        final = _parse_state(data['final'], path)
    elif segments:
        final = segments[-1].end_state
    else:
        raise DemoError('empty demonstration', path)

    return SegmentedDemo(tuple(segments), final, _parse_shapes(data, path),
        path)


def load_demo(path):
    """Reads a demonstration file.

    :param path:
        name of a JSON file in either the raw or pre-segmented layout
    :returns:
        :class:`RawDemo` for raw traces, :class:`SegmentedDemo` for
        pre-segmented files
    :raises DemoError:
        if the file is missing or violates the schema, naming the first
        offending frame when there is one
    """
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as e:
        raise DemoError('cannot read demonstration: %s' % e.strerror, path)
    except ValueError as e:
        raise DemoError('invalid JSON: %s' % e, path)

    if not isinstance(data, dict):
        raise DemoError('expected a JSON object', path)

    if 'frames' in data:
        if not isinstance(data['frames'], list):
            raise DemoError('"frames" must be a list', path)

        return _parse_frames(data, path)

    if 'segments' in data:
        if not isinstance(data['segments'], list):
            raise DemoError('"segments" must be a list', path)

        return _parse_segments(data, path)

    raise DemoError('neither "frames" nor "segments" present', path)

# ============================================================================
# Segmentation
# ============================================================================

def motion_magnitude(a, b):
    """Inter-frame displacement: translation norm plus the rotation angle
    through a ``ROTATION_LEVER`` arm."""
    offset = float(np.linalg.norm(a.t - b.t))
    return offset + ROTATION_LEVER * rotation_angle(a.q, b.q)


def _step_labels(raw, eps_move, hand_radius):
    # label[s] describes the motion between frames s and s + 1
    labels = []
    for index in range(1, len(raw.frames)):
        before = raw.frames[index - 1].state
        frame = raw.frames[index]
        moving = [k for k in raw.ids
            if motion_magnitude(before[k], frame.state[k]) > eps_move]

        if len(moving) > 1:
            raise AmbiguousCoMovement('ambiguous co-movement of %s' % (
                ', '.join(moving)), raw.source, index)

        label = moving[0] if moving else None
        if label and frame.hand is not None and hand_radius is not None:
            reach = np.linalg.norm(frame.hand.t - frame.state[label].t)
            if reach > hand_radius:
                label = None

        labels.append(label)

    return labels


def segment(raw, eps_move, min_frames, hand_radius=None):
    """Cuts a raw trace into :class:`ActionSegment` objects.  A segment is a
    run of at least ``min_frames`` steps in which exactly one object moves by
    more than ``eps_move``; runs of the same object separated by fewer than
    ``min_frames`` static steps are merged.  When the trace carries hand
    poses, a moving object only counts while the hand is within
    ``hand_radius`` of it.

    :raises AmbiguousCoMovement:
        if two objects move in the same step
    :returns:
        segments ordered by start frame
    """
    if eps_move <= 0:
        raise ValueError('eps_move must be positive')
    if min_frames < 1:
        raise ValueError('min_frames must be at least 1')

    labels = _step_labels(raw, eps_move, hand_radius)

    runs = []
    position = 0
    for label, group in itertools.groupby(labels):
        length = len(list(group))
        if label is not None:
            start, end = position, position + length - 1
            if runs and runs[-1][0] == label and \
                    start - runs[-1][2] - 1 < min_frames:
                runs[-1][2] = end
            else:
                runs.append([label, start, end])

        position += length

    segments = []
    for label, start, end in runs:
        if end - start + 1 < min_frames:
            logger.debug('dropping %s-step twitch of %s at frame %s',
                end - start + 1, label, start)
            continue

        first, last = start, end + 1
        path = tuple(raw.frames[i].state[label] for i in range(first,
            last + 1))
        segments.append(ActionSegment(label, raw.frames[first].state,
            raw.frames[last].state, path, first, last))

    logger.debug('%s: %s segments', raw.source or 'trace', len(segments))
    return segments


def segment_demo(demo, eps_move, min_frames, hand_radius=None):
    """Returns a :class:`SegmentedDemo`; pre-segmented demos pass through."""
    if isinstance(demo, SegmentedDemo):
        return demo

    segments = segment(demo, eps_move, min_frames, hand_radius)
    return SegmentedDemo(tuple(segments), demo.frames[-1].state, demo.shapes,
        demo.source)

# ============================================================================
# Demo Sets
# ============================================================================

def _check_segment(segment, index, demo_index, eps_t, eps_r, source):
    moved = segment.start_state.moved_objects(segment.end_state, eps_t,
        eps_r)
    extra = [k for k in moved if k != segment.object_id]
    if extra:
        raise DemoError('segment %s of demonstration %s moves %s besides %s'
            % (index, demo_index, ', '.join(extra), segment.object_id),
            source)

    start = segment.start_state[segment.object_id]
    end = segment.end_state[segment.object_id]
    for pose, anchor, name in ((segment.path[0], start, 'begin'),
            (segment.path[-1], end, 'end')):
        offset = float(np.linalg.norm(pose.t - anchor.t))
        if offset > eps_t or rotation_angle(pose.q, anchor.q) > eps_r:
            raise DemoError('path of segment %s in demonstration %s does '
                'not %s at the segment pose' % (index, demo_index, name),
                source)


def build_task_demo_set(demos, eps_static_t=EPS_STATIC_T,
        eps_static_r=EPS_STATIC_R):
    """Collects segmented demonstrations of one task and checks that they
    are consistent with each other.

    :param demos:
        list of :class:`SegmentedDemo`
    :returns:
        :class:`TaskDemoSet`
    :raises DemoError:
        if a demonstration is empty, object sets differ or a segment moves
        more than its own object
    """
    if not demos:
        raise DemoError('no demonstrations given')

    object_ids = tuple(demos[0].final_state.ids)
    shapes = {}
    for demo_index, demo in enumerate(demos):
        if not demo.segments:
            raise DemoError('demonstration %s has no action segments' % (
                demo_index), demo.source)

        states = [demo.final_state]
        for seg in demo.segments:
            states.extend([seg.start_state, seg.end_state])

        for state in states:
            if tuple(state.ids) != object_ids:
                raise DemoError('object-id set mismatch: expected %s, got %s'
                    % (list(object_ids), state.ids), demo.source)

        for index, seg in enumerate(demo.segments):
            _check_segment(seg, index, demo_index, eps_static_t,
                eps_static_r, demo.source)

        drift = demo.segments[-1].end_state.moved_objects(demo.final_state,
            eps_static_t, eps_static_r)
        if drift:
            raise DemoError('final state of demonstration %s differs from '
                'the end of its last segment for %s' % (demo_index,
                ', '.join(drift)), demo.source)

        shapes.update(demo.shapes)

    return TaskDemoSet(tuple(demos), object_ids, shapes)


def load_demo_set(paths, eps_move, min_frames, hand_radius=None,
        eps_static_t=EPS_STATIC_T, eps_static_r=EPS_STATIC_R):
    """Loads, segments and collects a list of demonstration files.  Every
    error names the offending file."""
    demos = []
    for path in paths:
        raw = load_demo(path)
        demos.append(segment_demo(raw, eps_move, min_frames, hand_radius))
        logger.info('%s: %s segments', path, len(demos[-1].segments))

    return build_task_demo_set(demos, eps_static_t, eps_static_r)

# ============================================================================
# Relation Extraction
# ============================================================================

def extract_final_relations(demo_set):
    """Final relative poses per ordered object pair.

    :returns:
        ``OrderedDict`` mapping ``(k, l)`` to the list of ``N`` poses of
        ``k`` relative to ``l`` at the end of each demonstration
    """
    relations = OrderedDict()
    for k, l in itertools.permutations(demo_set.object_ids, 2):
        relations[(k, l)] = [relative_pose(demo.final_state[l],
            demo.final_state[k]) for demo in demo_set.demos]

    return relations


def extract_action_samples(demo_set):
    """Goal poses seen for every manipulated object, one list per template.
    The template id is the id of the reference object; the self template
    uses the manipulated object's own id and is relative to its pose at the
    start of the segment.

    :returns:
        ``OrderedDict`` mapping object id to an ``OrderedDict`` of template
        id to a list of relative poses
    """
    samples = OrderedDict()
    for demo in demo_set.demos:
        for seg in demo.segments:
            k = seg.object_id
            templates = samples.setdefault(k, OrderedDict(
                [(l, []) for l in demo_set.object_ids if l != k] + [(k, [])]))

            end = seg.end_state[k]
            for l in templates:
                if l == k:
                    reference = seg.start_state[k]
                else:
                    reference = seg.end_state[l]

                templates[l].append(relative_pose(reference, end))

    return samples
