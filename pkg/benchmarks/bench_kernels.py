"""Compare the compiled and pure-Python pivot kernels.

Two measurements:

* pivot: repeated pivots on random integer tableaux, calling each kernel
  module directly;
* solve: a coherence LP workload run in a subprocess per backend, with
  ``LUKPROB_PURE_PYTHON`` choosing the kernel the solver imports.

Usage: ``python3 benchmarks/bench_kernels.py [--rows 40] [--cols 80] [--repeat 5]``
"""

import argparse
import os
import random
import subprocess
import sys
import time

from lukprob.solver import _kernels_py

try:
    from lukprob.solver import _kernels as compiled
except ImportError:
    compiled = None

SOLVE_SNIPPET = r"""
import random, time
from fractions import Fraction
from lukprob.solver import ConstraintSystem, build_coherence, lp_feasible, kernels
from lukprob.syntax import Compl, Meet, Var
rng = random.Random(1)
t0 = time.perf_counter()
for _ in range(40):
    props = [f"p{k}" for k in range(6)]
    atoms = [Var(p) for p in props] + [Meet(Var(rng.choice(props)), Compl(Var(rng.choice(props))))
                                       for _ in range(4)]
    names = [f"x{i}" for i in range(len(atoms))]
    s = ConstraintSystem()
    for n in names:
        s.add_var(n, Fraction(rng.randint(0, 10), 10), Fraction(1))
    s.add_block(build_coherence("w", atoms, names))
    lp_feasible(s)
print(kernels.BACKEND, time.perf_counter() - t0)
"""


def random_tableau(rng, rows, cols):
    tab = [[rng.randint(-9, 9) for _ in range(cols)] for _ in range(rows)]
    for r in tab:
        r[0] = abs(r[0]) + 1
    return tab


def bench_pivot(mod, rows, cols, repeat, seed=0):
    rng = random.Random(seed)
    best = float("inf")
    for _ in range(repeat):
        tab = random_tableau(rng, rows, cols)
        dens = [1] * rows
        t0 = time.perf_counter()
        for k in range(min(rows, cols) - 1):
            r = k
            c = next((j for j in range(cols) if tab[r][j] > 0), None)
            if c is None:
                break
            mod.pivot(tab, dens, r, c)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_solve(pure: bool):
    env = dict(os.environ)
    env.pop("LUKPROB_PURE_PYTHON", None)
    if pure:
        env["LUKPROB_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET], env=env, check=True,
                         capture_output=True, text=True).stdout.split()
    return out[0], float(out[1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=40)
    ap.add_argument("--cols", type=int, default=80)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    py = bench_pivot(_kernels_py, args.rows, args.cols, args.repeat)
    print(f"pivot  python  {py * 1000:9.1f} ms")
    if compiled is None:
        print("pivot  cython  (not built)")
    else:
        cy = bench_pivot(compiled, args.rows, args.cols, args.repeat)
        print(f"pivot  cython  {cy * 1000:9.1f} ms  speedup {py / cy:.2f}x")
    name_py, t_py = bench_solve(pure=True)
    name_cy, t_cy = bench_solve(pure=False)
    print(f"solve  {name_py:7} {t_py * 1000:9.1f} ms")
    print(f"solve  {name_cy:7} {t_cy * 1000:9.1f} ms  speedup {t_py / t_cy:.2f}x")


if __name__ == "__main__":
    main()
