"""From position probabilities to a symmetrized alignment.

A predictor emits, per query, a start and an end distribution over the
context's characters plus one null slot (index 0). The decoder picks
the best-scoring span, applies the null margin, and the two directions
are averaged per token pair and thresholded.

    python3 demos/03_decode_and_symmetrize.py
"""

import numpy as np

from spanalign import (
    CharSpan,
    DecodeConfig,
    Direction,
    DirectionalWeights,
    PositionDistributions,
    bidi_average_threshold,
    decode,
)

CONTEXT = "the cat sleeps"
TOKEN_SPANS = [CharSpan(0, 3), CharSpan(4, 7), CharSpan(8, 14)]


def soft_spike(length, peak, mass=0.85):
    """A distribution concentrated at one position, rest spread evenly."""
    vec = np.full(length, (1 - mass) / (length - 1))
    vec[peak] = mass
    return vec


def main() -> None:
    m = len(CONTEXT)

    # A confident span prediction for "cat": start at char 4, end at
    # char 6 (vector slot = char + 1; slot 0 is the null slot).
    d = PositionDistributions(
        "demo_0_f_1_0",
        p_start=soft_spike(m + 1, 4 + 1),
        p_end=soft_spike(m + 1, 6 + 1),
    )
    d.validate()
    pred = decode(d, DecodeConfig(tau=0.0))
    span = pred.best.span
    print(f"best span [{span.start},{span.end}) = {CONTEXT[span.start:span.end]!r} "
          f"score {pred.best.score:.3f} null {pred.null_score:.4f} -> "
          f"{'null' if pred.is_null else 'non-null'}")

    # Raising tau makes the same evidence insufficient.
    strict = decode(d, DecodeConfig(tau=0.9))
    print(f"same distributions at tau=0.9 -> "
          f"{'null' if strict.is_null else 'non-null'}")

    # A token counts as aligned when its character span lies completely
    # inside the predicted span; it then inherits the span's score.
    score = pred.best.score
    covered = [i for i, ts in enumerate(TOKEN_SPANS) if span.contains(ts)]
    print(f"target tokens covered by the span: {covered}")

    # Two directional weight tables, averaged and thresholded at 0.4.
    # One confident direction is enough: (0.9 + 0) / 2 = 0.45.
    w_f = DirectionalWeights(Direction.L1_TO_L2, {(1, 1): round(score, 3), (0, 0): 0.9})
    w_b = DirectionalWeights(Direction.L2_TO_L1, {(1, 1): 0.7, (2, 2): 0.35})
    hyp = bidi_average_threshold(w_f, w_b, theta=0.4)
    print("\npair   forward backward mean   kept")
    for pair in sorted(set(w_f.weights) | {(j, i) for i, j in w_b.weights}):
        f = w_f.weights.get(pair, 0.0)
        b = w_b.transposed().get(pair, 0.0)
        print(f"{pair}  {f:.3f}   {b:.3f}    {(f + b) / 2:.3f}  "
              f"{'yes' if pair in hyp.links else 'no'}")
    print("pharaoh:", hyp.to_pharaoh(with_weights=True))


if __name__ == "__main__":
    main()
