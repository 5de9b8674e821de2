import numpy as np
import pytest

from depsum.embed import HashedBackend


@pytest.fixture
def backend64():
    return HashedBackend(dim=64, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def finite_difference_gradcheck(params, config, x, y, gamma, weights, h=1e-5, floor=1e-6):
    """Worst relative error of analytic vs central-difference gradients.

    Relative error uses max(|fd|, |analytic|, floor) in the denominator; the
    floor absorbs finite-difference rounding noise at coordinates whose true
    gradient is identically ~0 (conv biases under train-mode batch norm).
    Returns (worst_rel_err, (tensor_key, index)).
    """
    from depsum.model import Mode, backward_batch, batch_focal_loss, forward_batch

    def loss_at():
        logits, _ = forward_batch(x, params, config, Mode.TRAIN, None)
        return batch_focal_loss(logits, y, gamma, weights)[0]

    logits, cache = forward_batch(x, params, config, Mode.TRAIN, None)
    _, dlogits = batch_focal_loss(logits, y, gamma, weights)
    grads = backward_batch(dlogits, cache, params, config)
    worst = 0.0
    worst_at = None
    for key in sorted(grads):
        tensor = params.tensors[key]
        for flat in range(tensor.size):
            idx = np.unravel_index(flat, tensor.shape)
            orig = tensor[idx]
            tensor[idx] = orig + h
            lp = loss_at()
            tensor[idx] = orig - h
            lm = loss_at()
            tensor[idx] = orig
            fd = (lp - lm) / (2.0 * h)
            an = grads[key][idx]
            rel = abs(fd - an) / max(floor, abs(fd), abs(an))
            if rel > worst:
                worst, worst_at = rel, (key, idx)
    return worst, worst_at


def make_turn_sequence(speakers, texts=None):
    """Build Turn objects from a speaker pattern like 'EPPEP'."""
    from depsum.corpus import Speaker, Turn

    turns = []
    participant_i = 0
    for i, s in enumerate(speakers):
        if s == "P":
            participant_i += 1
            text = texts[participant_i - 1] if texts else f"p{participant_i}"
            turns.append(Turn(float(i), float(i) + 0.5, Speaker.PARTICIPANT, text))
        else:
            turns.append(Turn(float(i), float(i) + 0.5, Speaker.INTERVIEWER, "question"))
    return turns
