# improvr.intention.py
"""Intention likelihood of a task.

Every ordered object pair ``(k, l)`` gets a kernel density over the pose of
``k`` relative to ``l`` built from the final states of the demonstrations.
Pairs that were demonstrated consistently (low entropy) get large weights;
the likelihood of a state is the normalized weighted sum of the pair
densities.
"""
import logging, math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from improvr.exceptions import ModelError
from improvr.geometry import (Pose, PoseDistanceParams, relative_pose,
    stack_poses, perturb_poses)

logger = logging.getLogger(__name__)

# ============================================================================
# Relation Model
# ============================================================================

@dataclass(frozen=True)
class RelationModel:
    """Kernel density over the pose of ``pair[0]`` relative to ``pair[1]``,
    with one mode per demonstration."""
    pair: tuple
    samples: tuple
    bandwidth: PoseDistanceParams
    entropy: float = 0.0
    weight: float = 1.0

    def __post_init__(self):
        if not self.samples:
            raise ModelError('relation %s has no samples' % (self.pair, ))
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise ModelError('relation %s has invalid weight %r' % (
                self.pair, self.weight))

    def __str__(self):
        return 'RelationModel(%s|%s, N=%s, w=%.4g)' % (self.pair[0],
            self.pair[1], len(self.samples), self.weight)

    @cached_property
    def arrays(self):
        return stack_poses(self.samples)

    def log_densities(self, translations, quats):
        """Log density at each of a batch of stacked poses."""
        modes_t, modes_q = self.arrays
        sigma_t = self.bandwidth.sigma_t
        sigma_r = self.bandwidth.sigma_r

        offsets = translations[:, None, :] - modes_t[None, :, :]
        dots = np.minimum(1.0, np.abs(quats @ modes_q.T))
        thetas = 2 * np.arccos(dots)
        squared = (np.sum(offsets ** 2, axis=2) / sigma_t ** 2
            + thetas ** 2 / sigma_r ** 2)

        return (logsumexp(-0.5 * squared, axis=1) - math.log(len(
            self.samples)) - math.log(self.bandwidth.normalizer))

    def to_json(self):
        return {
            'pair':list(self.pair),
            'samples':[p.to_json() for p in self.samples],
            'entropy':self.entropy,
            'weight':self.weight,
        }

    @classmethod
    def from_json(cls, data, bandwidth):
        return cls(tuple(data['pair']), tuple(Pose.from_json(p) for p in
            data['samples']), bandwidth, float(data['entropy']),
            float(data['weight']))


def kernel_density(model, query):
    """Gaussian kernel density of ``model`` at the relative pose ``query``:
    the mean over the modes of ``exp(-d^2 / 2) / Z``."""
    translations, quats = stack_poses([query])
    return float(np.exp(model.log_densities(translations, quats)[0]))


def entropy_terms(model, M, seed):
    """Negative log densities at ``M`` points drawn from the model itself: a
    mode is picked uniformly and perturbed with kernel noise.  Their mean is
    the entropy estimate, their spread gives its standard error."""
    if M < 1:
        raise ValueError('need at least one entropy sample')

    rng = np.random.default_rng(seed)
    modes_t, modes_q = model.arrays
    picks = rng.integers(0, len(model.samples), M)
    translations, quats = perturb_poses(modes_t[picks], modes_q[picks],
        model.bandwidth, rng)

    return -model.log_densities(translations, quats)


def estimate_entropy(model, M, seed):
    """Monte Carlo estimate of the differential entropy of the relation
    density, in nats.  Deterministic for a fixed seed."""
    return float(np.mean(entropy_terms(model, M, seed)))


def compute_weights(entropies):
    """Turns relation entropies into weights ``1 / (eps_H + H)`` with
    ``eps_H = 0.01 - min(0, H_min)``.

    :param entropies:
        dictionary of pair to entropy
    :returns:
        tuple ``(weights, eta, eps_H)`` where ``weights`` is a dictionary of
        pair to weight and ``eta`` normalizes the weights to sum to one
    """
    if not entropies:
        raise ModelError('no relations to weigh')

    eps_H = 0.01 - min(0.0, min(entropies.values()))
    weights = {pair:1.0 / (eps_H + h) for pair, h in entropies.items()}
    eta = 1.0 / sum(weights.values())
    return weights, eta, eps_H

# ============================================================================
# Intention Model
# ============================================================================

@dataclass(frozen=True)
class IntentionModel:
    relations: tuple
    eta: float
    eps_H: float

    def __post_init__(self):
        if not self.relations:
            raise ModelError('intention model needs at least one relation')
        if not self.eps_H > 0:
            raise ModelError('eps_H must be positive')

    @classmethod
    def factory(cls, final_relations, bandwidth, M=1000, seed=0):
        """Learns the model from the per-pair final relative poses.  Each
        relation's entropy is estimated with its own child of the seed
        sequence.

        :param final_relations:
            dictionary of ``(k, l)`` to the list of demonstrated poses, see
            :func:`improvr.demonstrations.extract_final_relations`
        """
        seeds = np.random.SeedSequence(seed).spawn(len(final_relations))
        entropies = {}
        for child, (pair, samples) in zip(seeds, final_relations.items()):
            relation = RelationModel(pair, tuple(samples), bandwidth)
            entropies[pair] = estimate_entropy(relation, M, child)

        weights, eta, eps_H = compute_weights(entropies)
        relations = tuple(RelationModel(pair, tuple(samples), bandwidth,
            entropies[pair], weights[pair])
            for pair, samples in final_relations.items())

        for relation in relations:
            logger.info('relation %s|%s: H=%.4f w=%.4f', relation.pair[0],
                relation.pair[1], relation.entropy, relation.weight)

        return cls(relations, eta, eps_H)

    @property
    def bandwidth(self):
        return self.relations[0].bandwidth

    @property
    def object_ids(self):
        ids = []
        for relation in self.relations:
            for object_id in relation.pair:
                if object_id not in ids:
                    ids.append(object_id)

        return ids

    def likelihood(self, state):
        return intention_likelihood(self, state)

    def to_json(self):
        return {
            'eta':self.eta,
            'eps_H':self.eps_H,
            'relations':[r.to_json() for r in self.relations],
        }

    @classmethod
    def from_json(cls, data, bandwidth):
        relations = tuple(RelationModel.from_json(r, bandwidth)
            for r in data['relations'])
        return cls(relations, float(data['eta']), float(data['eps_H']))


def intention_likelihood(model, state):
    """Intention likelihood ``eta * sum(w * p(relative pose))`` over every
    modeled pair.  Objects in ``state`` that the model does not mention are
    ignored.

    :raises ModelError:
        if ``state`` lacks one of the modeled objects
    """
    total = 0.0
    for relation in model.relations:
        k, l = relation.pair
        try:
            query = relative_pose(state[l], state[k])
        except KeyError as e:
            raise ModelError('state has no pose for object %s' % e.args[0])

        total += relation.weight * kernel_density(relation, query)

    return model.eta * total
