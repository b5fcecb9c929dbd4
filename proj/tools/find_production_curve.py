"""Search for the production curve y^2 = x^3 - 3x + b over F_(2^127 - 1).

Needs PARI/GP through cypari2 for SEA point counting. Takes the first b >= 1
with a prime group order, then the on-curve point with the smallest x >= 1
and the numerically smaller y.

    python tools/find_production_curve.py [--start 1] [--limit 1000]
"""

import argparse
import json
import sys

Q = 2**127 - 1
A = Q - 3


def smallest_point(b):
    for x in range(1, 10_000):
        rhs = (x * x * x + A * x + b) % Q
        if pow(rhs, (Q - 1) // 2, Q) == 1:
            y = pow(rhs, (Q + 1) // 4, Q)
            return x, min(y, Q - y)
    raise RuntimeError("no small x on the curve")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--start", type=int, default=1)
    ap.add_argument("--limit", type=int, default=1000)
    args = ap.parse_args()
    try:
        import cypari2
    except ImportError:
        sys.exit("cypari2 is required for point counting")
    pari = cypari2.Pari()
    pari.allocatemem(2**30)
    for b in range(args.start, args.start + args.limit):
        if (4 * A**3 + 27 * b * b) % Q == 0:
            continue
        e = pari.ellinit([A, b], Q)
        n = int(pari.ellcard(e))
        if not pari.isprime(n):
            continue
        gx, gy = smallest_point(b)
        print(json.dumps({"q": str(Q), "a": str(A), "b": str(b), "gen_x": str(gx), "gen_y": str(gy),
                          "order_hint": str(n)}, indent=2))
        return
    sys.exit("no prime-order curve in range")


if __name__ == "__main__":
    main()
