"""Regenerate the newform fixtures in src/heegner_lab/data from eta products.

    python3 tools/gen_fixtures.py
"""

import json
import pathlib

M = 200
OUT = pathlib.Path(__file__).resolve().parent.parent / "src" / "heegner_lab" / "data"


def eta_product(parts, M):
    """q * prod over (level, power) of prod_n (1 - q^(level n))^power, coefficients a_1..a_M."""
    series = [0] * (M + 1)
    series[0] = 1
    for level, power in parts:
        for _ in range(power):
            for n in range(level, M + 1, level):
                for i in range(M, n - 1, -1):
                    series[i] -= series[i - n]
    return [0] + series[:M]


def record(label, N, weight, parts):
    an = eta_product(parts, M)
    return {
        "label": label,
        "N": N,
        "weight": weight,
        "eps": {"modulus": N, "values": {str(a): "0" for a in range(N) if _coprime(a, N)}},
        "an": [str(x) for x in an[1:]],
        "context": {"kind": "integer"},
    }


def _coprime(a, b):
    import math
    return math.gcd(a, b) == 1


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    fixtures = {
        "11a.json": record("11a", 11, 2, [(1, 2), (11, 2)]),
        "5.4.a.json": record("5.4.a", 5, 4, [(1, 4), (5, 4)]),
        "delta.json": record("delta", 1, 12, [(1, 24)]),
    }
    for name, data in fixtures.items():
        (OUT / name).write_text(json.dumps(data, indent=1) + "\n")
        print("wrote", OUT / name)


if __name__ == "__main__":
    main()
