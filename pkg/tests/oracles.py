"""Brute-force reference implementations used to cross-check the library.

Everything here is recomputed from first principles on the raw edge list,
in plain non-log arithmetic, with explicit loops: no code or intermediate
arrays are shared with the implementations under test.
"""

import math
from itertools import product


def edge_prob_map(net):
    return {(e.disease_id, e.finding_id): e.prob for e in net.edges}


def direct_posterior(net, positive, negative):
    """Per-disease prior times activation products, normalized directly."""
    probs = edge_prob_map(net)
    weights = []
    for j in range(net.n_diseases):
        w = net.diseases[j].prior
        for i in positive:
            w *= probs.get((j, i), 0.0)
        for i in negative:
            w *= 1.0 - probs.get((j, i), 0.0)
        weights.append(w)
    total = sum(weights)
    if total == 0.0:
        return [d.prior for d in net.diseases], True
    return [w / total for w in weights], False


def enumeration_posterior(net, positive, negative, config_prior):
    """Marginals P(disease_j = 1 | evidence) by full configuration sweep.

    ``config_prior(config)`` gives the prior probability of a 0/1 disease
    vector; the likelihood is noisy-OR with no leak.
    """
    probs = edge_prob_map(net)
    n = net.n_diseases
    numerators = [0.0] * n
    denominator = 0.0
    for config in product((0, 1), repeat=n):
        w = config_prior(config)
        if w == 0.0:
            continue
        for i in positive:
            absent = 1.0
            for j in range(n):
                if config[j]:
                    absent *= 1.0 - probs.get((j, i), 0.0)
            w *= 1.0 - absent
        for i in negative:
            for j in range(n):
                if config[j]:
                    w *= 1.0 - probs.get((j, i), 0.0)
        denominator += w
        for j in range(n):
            if config[j]:
                numerators[j] += w
    if denominator == 0.0:
        raise ZeroDivisionError("evidence impossible under this prior")
    return [num / denominator for num in numerators]


def independent_prior(net):
    priors = [d.prior for d in net.diseases]

    def config_prior(config):
        w = 1.0
        for j, bit in enumerate(config):
            w *= priors[j] if bit else 1.0 - priors[j]
        return w

    return config_prior


def one_hot_prior(net):
    priors = [d.prior for d in net.diseases]

    def config_prior(config):
        if sum(config) != 1:
            return 0.0
        return priors[config.index(1)]

    return config_prior


def direct_outcome_probability(net, positive, negative, finding_id):
    probs = edge_prob_map(net)
    post, _ = direct_posterior(net, positive, negative)
    return sum(post[j] * probs.get((j, finding_id), 0.0) for j in range(net.n_diseases))


def bernoulli_kl(a, b):
    val = 0.0
    if a > 0.0:
        val += a * math.log(a / b)
    if a < 1.0:
        val += (1.0 - a) * math.log((1.0 - a) / (1.0 - b))
    return val


def bernoulli_entropy(p):
    val = 0.0
    if p > 0.0:
        val -= p * math.log(p)
    if p < 1.0:
        val -= (1.0 - p) * math.log(1.0 - p)
    return val


def divergence(after, before, kind):
    total = 0.0
    for a, b in zip(after, before):
        if kind == "kl":
            if a == b:
                continue
            total += bernoulli_kl(a, b)
        else:
            total += bernoulli_entropy(b) - bernoulli_entropy(a)
    return total


def direct_utility(net, positive, negative, finding_id, kind="kl"):
    """Expected divergence of the updated beliefs, straight double sum."""
    before, _ = direct_posterior(net, positive, negative)
    value = 0.0
    for outcome in (True, False):
        p_outcome = direct_outcome_probability(net, positive, negative, finding_id)
        if not outcome:
            p_outcome = 1.0 - p_outcome
        if p_outcome == 0.0:
            continue
        if outcome:
            after, _ = direct_posterior(net, positive | {finding_id}, negative)
        else:
            after, _ = direct_posterior(net, positive, negative | {finding_id})
        value += p_outcome * divergence(after, before, kind)
    return value


def oracle_candidates(net, positive, observed):
    """Adjacency walk over the raw edge list."""
    if positive:
        diseases = {e.disease_id for e in net.edges if e.finding_id in positive}
        findings = {e.finding_id for e in net.edges if e.disease_id in diseases}
    else:
        findings = set(range(net.n_findings))
    return findings - set(observed)


def two_level_value(net, positive, negative, finding_id, kind="kl"):
    """Exhaustive enumeration of every (answer, follow-up, answer) path.

    Path values are divergences between the path-end beliefs and the
    root beliefs; follow-ups maximize, answers average.
    """
    root, _ = direct_posterior(net, positive, negative)

    def outcome_prob(pos, neg, f):
        return direct_outcome_probability(net, pos, neg, f)

    value = 0.0
    for y1 in (True, False):
        p1 = outcome_prob(positive, negative, finding_id)
        if not y1:
            p1 = 1.0 - p1
        if p1 == 0.0:
            continue
        pos1 = positive | {finding_id} if y1 else positive
        neg1 = negative if y1 else negative | {finding_id}
        followups = oracle_candidates(net, pos1, pos1 | neg1)
        if not followups:
            after1, _ = direct_posterior(net, pos1, neg1)
            value += p1 * divergence(after1, root, kind)
            continue
        best = None
        for f2 in sorted(followups):
            sub = 0.0
            for y2 in (True, False):
                p2 = outcome_prob(pos1, neg1, f2)
                if not y2:
                    p2 = 1.0 - p2
                if p2 == 0.0:
                    continue
                pos2 = pos1 | {f2} if y2 else pos1
                neg2 = neg1 if y2 else neg1 | {f2}
                after2, _ = direct_posterior(net, pos2, neg2)
                sub += p2 * divergence(after2, root, kind)
            if best is None or sub > best:
                best = sub
        value += p1 * best
    return value
