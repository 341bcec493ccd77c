"""Finite-difference verification of every trained component's gradients.

Each checked operation is wrapped in a scalar loss (0.5 L2 against a fixed
target, or the skip-gram loss itself, which is already scalar). The
analytic gradient of every parameter coordinate is compared against a
central difference; the max relative error comes back to the caller.
"""

from enum import Enum

import numpy as np

from .embedding import (Activation, aggregate_backward, canonical_mean,
                        skipgram_grads_vectors, skipgram_loss_vectors)
from .encoder import GruParams, gru_step_backward, gru_step_cached
from .errors import GradientError
from .ranking import FusionLayer, fuse, fuse_backward

REL_ERR_FLOOR = 1e-6  # denominator floor: |a - n| / max(floor, |a| + |n|)


class GradCheckOp(str, Enum):
    AGGREGATE = "aggregate"
    SKIPGRAM = "skipgram"
    FUSION = "fusion"
    GRU = "gru"


def _l2_half(diff: np.ndarray) -> float:
    return 0.5 * float(diff @ diff)


def _aggregate_setup(params, inputs):
    neighbors = np.asarray(inputs["neighbors"], dtype=float)
    target = np.asarray(inputs["target"], dtype=float)
    activation = inputs.get("activation", Activation.TANH)

    def loss(p):
        out = activation.apply(np.asarray(p["w"]) @ canonical_mean(neighbors))
        return _l2_half(out - target)

    out = activation.apply(np.asarray(params["w"]) @ canonical_mean(neighbors))
    dw, _ = aggregate_backward(np.asarray(params["w"]), neighbors, activation,
                               out - target)
    return loss, {"w": dw}


def _fusion_setup(params, inputs):
    u_c = np.asarray(inputs["u_content"], dtype=float)
    u_h = np.asarray(inputs["u_hashtag"], dtype=float)
    target = np.asarray(inputs["target"], dtype=float)
    activation = inputs.get("activation", Activation.TANH)

    def loss(p):
        layer = FusionLayer(np.asarray(p["w"]), np.asarray(p["b"]), activation)
        return _l2_half(fuse(layer, u_c, u_h) - target)

    layer = FusionLayer(np.asarray(params["w"]), np.asarray(params["b"]), activation)
    dw, db, _, _ = fuse_backward(layer, u_c, u_h, fuse(layer, u_c, u_h) - target)
    return loss, {"w": dw, "b": db}


def _skipgram_setup(params, inputs):
    def loss(p):
        return skipgram_loss_vectors(np.asarray(p["center"]),
                                     np.asarray(p["context"]),
                                     np.asarray(p["negatives"]))

    _, d_center, d_context, d_negs = skipgram_grads_vectors(
        np.asarray(params["center"]), np.asarray(params["context"]),
        np.asarray(params["negatives"]))
    return loss, {"center": d_center, "context": d_context, "negatives": d_negs}


def _gru_setup(params, inputs):
    x = np.asarray(inputs["x"], dtype=float)
    h_prev = np.asarray(inputs["h_prev"], dtype=float)
    target = np.asarray(inputs["target"], dtype=float)

    def loss(p):
        gp = GruParams(**{k: np.asarray(v) for k, v in p.items()})
        h, _ = gru_step_cached(gp, x, h_prev)
        return _l2_half(h - target)

    gp = GruParams(**{k: np.asarray(v) for k, v in params.items()})
    h, cache = gru_step_cached(gp, x, h_prev)
    grads = gp.zeros_like()
    gru_step_backward(gp, cache, h - target, grads)
    return loss, grads


_SETUPS = {
    GradCheckOp.AGGREGATE: _aggregate_setup,
    GradCheckOp.FUSION: _fusion_setup,
    GradCheckOp.SKIPGRAM: _skipgram_setup,
    GradCheckOp.GRU: _gru_setup,
}


def grad_check(op: GradCheckOp, params: dict, inputs: dict,
               epsilon: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients
    over every parameter coordinate of the named operation."""
    if not 1e-7 <= epsilon <= 1e-3:
        raise ValueError("epsilon must lie in [1e-7, 1e-3]")
    op = GradCheckOp(op)
    params = {k: np.array(v, dtype=float) for k, v in params.items()}
    loss_fn, analytic = _SETUPS[op](params, inputs)

    worst = 0.0
    for name, arr in params.items():
        grad = np.asarray(analytic[name], dtype=float)
        bad = np.argwhere(~np.isfinite(grad))
        if bad.size:
            raise GradientError(op.value, f"{name}{tuple(bad[0])}")
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up = loss_fn(params)
            flat[i] = orig - epsilon
            down = loss_fn(params)
            flat[i] = orig
            numeric = (up - down) / (2.0 * epsilon)
            a = gflat[i]
            rel = abs(a - numeric) / max(REL_ERR_FLOOR, abs(a) + abs(numeric))
            worst = max(worst, rel)
    return worst


def gradcheck_case(op: GradCheckOp, seed: int, dim: int = 6,
                   activation: Activation = Activation.TANH):
    """A random small (params, inputs) instance for the named op."""
    rng = np.random.default_rng(seed)
    op = GradCheckOp(op)
    if op is GradCheckOp.AGGREGATE:
        return ({"w": rng.uniform(-0.5, 0.5, (dim, dim))},
                {"neighbors": rng.uniform(-1, 1, (4, dim)),
                 "target": rng.uniform(-1, 1, dim),
                 "activation": activation})
    if op is GradCheckOp.FUSION:
        return ({"w": rng.uniform(-0.5, 0.5, (dim, 2 * dim)),
                 "b": rng.uniform(-0.5, 0.5, dim)},
                {"u_content": rng.uniform(-1, 1, dim),
                 "u_hashtag": rng.uniform(-1, 1, dim),
                 "target": rng.uniform(-1, 1, dim),
                 "activation": activation})
    if op is GradCheckOp.SKIPGRAM:
        return ({"center": rng.uniform(-0.5, 0.5, dim),
                 "context": rng.uniform(-0.5, 0.5, dim),
                 "negatives": rng.uniform(-0.5, 0.5, (3, dim))},
                {})
    arrays = GruParams.init(dim, dim, rng, scale=0.5).arrays()
    params = {k: rng.uniform(-0.5, 0.5, v.shape) if k.startswith("b") else v.copy()
              for k, v in arrays.items()}
    return (params,
            {"x": rng.uniform(-1, 1, dim),
             "h_prev": rng.uniform(-1, 1, dim),
             "target": rng.uniform(-1, 1, dim)})


def check_all(seed: int = 0, epsilon: float = 1e-5) -> dict:
    """grad_check over all four ops at one seed; op name -> max rel error."""
    results = {}
    for op in GradCheckOp:
        params, inputs = gradcheck_case(op, seed)
        results[op.value] = grad_check(op, params, inputs, epsilon)
    return results
