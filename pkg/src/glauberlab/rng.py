"""Deterministic seeding and stream derivation.

Every randomized routine takes an integer seed and derives private child
streams by hashing the seed together with a tag path.  This keeps results
reproducible when phases are reordered or skipped: the stream used to
generate a graph never interferes with the one driving the dynamics.

The workhorse generator is ``random.Random`` (its ``random()`` output is
identical across CPython versions for a fixed state).  Numpy generators
appear only in batch sampling helpers, seeded through the same derivation.
"""

import hashlib
import json
import random

MASK64 = (1 << 64) - 1


def derive_seed(seed, *tags):
    """Derive a child seed from ``seed`` and a path of string tags.

    The derivation is a SHA-256 over the decimal form of the masked seed
    followed by "/"-prefixed tags, so ("a", "b") and ("a/b",) differ.
    """
    h = hashlib.sha256()
    h.update(str(seed & MASK64).encode("ascii"))
    for tag in tags:
        h.update(b"/")
        h.update(str(tag).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big")


def make_rng(seed, *tags):
    """Return a ``random.Random`` seeded from the derived child seed."""
    return random.Random(derive_seed(seed, *tags))


def rng_state_to_hex(rng):
    """Serialize a ``random.Random`` state to a hex string."""
    version, pool, gauss = rng.getstate()
    payload = json.dumps([version, list(pool), gauss])
    return payload.encode("ascii").hex()


def rng_state_from_hex(text):
    """Rebuild a ``random.Random`` from ``rng_state_to_hex`` output."""
    version, pool, gauss = json.loads(bytes.fromhex(text).decode("ascii"))
    rng = random.Random()
    rng.setstate((version, tuple(pool), gauss))
    return rng


def sample_index(weights, u):
    """Pick an index from nonnegative ``weights`` using uniform draw ``u``.

    The cumulative walk scans in index order, so for a fixed ``u`` the
    result is a deterministic function of the weight vector.  ``u`` is
    interpreted against the total mass; a zero-total vector is an error
    for the caller to prevent.
    """
    total = 0.0
    for w in weights:
        total += w
    target = u * total
    acc = 0.0
    last_positive = None
    for i, w in enumerate(weights):
        if w <= 0.0:
            continue
        acc += w
        last_positive = i
        if target < acc:
            return i
    # Rounding can leave target == acc; fall back to the last live index.
    if last_positive is None:
        raise ValueError("sample_index needs at least one positive weight")
    return last_positive
