"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--names 200000] [--repeat 5]
"""

from __future__ import annotations

import argparse
import random
import timeit

from allowlistforge import kernels


def synthetic_names(count: int, seed: int) -> list[str]:
    rng = random.Random(seed)
    roots = ["com", "org", "io", "net", "de", "dev", "me"]
    pool = ["".join(rng.choice("abcdefghijklmnop") for _ in range(rng.randint(2, 8))) for _ in range(2000)]
    return [".".join([rng.choice(roots)] + rng.sample(pool, rng.randint(0, 4))) for _ in range(count)]


def synthetic_fqcns(names: list[str], count: int, seed: int) -> list[str]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        pkg = rng.choice(names)
        cls = rng.choice(["a", "Main", "b", "Helper", "Z", "Adapter"])
        out.append(f"{pkg}.extra.{cls}" if rng.random() < 0.5 else f"{pkg}.{cls}")
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--names", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if kernels.compiled is None:
        raise SystemExit("compiled extension not available; build with `pip install -e . --no-build-isolation`")

    names = synthetic_names(args.names, seed=1)
    entries = frozenset(kernels.compiled.prune_covered(names[: args.names // 4])[0])
    fqcns = synthetic_fqcns(names, args.names, seed=2)
    cases = {
        "prune_covered": lambda k: k.prune_covered(names),
        "covered_mask": lambda k: k.covered_mask(names, entries),
        "classify_many": lambda k: k.classify_many(fqcns, "com.app", entries),
        "field_stats": lambda k: k.field_stats(names),
    }
    print(f"{args.names:,} names, best of {args.repeat}")
    print(f"{'kernel':<16}{'pure (s)':>12}{'compiled (s)':>14}{'speedup':>10}")
    for label, fn in cases.items():
        pure = min(timeit.repeat(lambda: fn(kernels.pure), number=1, repeat=args.repeat))
        fast = min(timeit.repeat(lambda: fn(kernels.compiled), number=1, repeat=args.repeat))
        print(f"{label:<16}{pure:>12.4f}{fast:>14.4f}{pure / fast:>9.1f}x")


if __name__ == "__main__":
    main()
