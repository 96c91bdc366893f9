"""Smoke test for the gmnf_bp extension.

Uses an installed `gmnf_bp` if present, else the cdylib from
`cargo build -p gmnf-py --features extension-module`.
"""

import importlib.machinery
import importlib.util
import pathlib
import sys
from fractions import Fraction

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    try:
        import gmnf_bp

        return gmnf_bp
    except ImportError:
        pass
    for profile in ("debug", "release"):
        lib = ROOT / "target" / profile / "libgmnf_bp.so"
        if lib.exists():
            loader = importlib.machinery.ExtensionFileLoader("gmnf_bp", str(lib))
            spec = importlib.util.spec_from_file_location("gmnf_bp", str(lib), loader=loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("gmnf_bp not found; build it with: cargo build -p gmnf-py --features extension-module")


CHAIN = """{
  "vertices": 3,
  "balance": ["1", "0", "-2"],
  "edges": [
    {"id": 0, "tail": 0, "head": 1, "cost": "7", "capacity": "2", "a_tail": "1", "a_head": "-2"},
    {"id": 1, "tail": 1, "head": 2, "cost": "-4", "capacity": "3", "a_tail": "1", "a_head": "-1"}
  ]
}"""


def main():
    g = load()

    inst = g.Instance.from_json(CHAIN)
    assert (inst.vertex_count, inst.edge_count) == (3, 2)
    assert inst.validate()["ratio_balanced"]
    bp = inst.solve_bp()
    assert bp["converged"] and bp["flow"] == ["1", "2"], bp
    assert inst.objective([1, 2]) == "-1"
    assert inst.is_feasible([Fraction(1), 2]) and not inst.is_feasible([0, 0])
    oracle = inst.oracle()
    assert oracle["unique"] and oracle["solutions"] == [["1", "2"]]
    cert = inst.certify()
    assert cert["status"] == "certified" and cert["bound"] == 3, cert
    assert inst.analyze()["bound"] == 3

    gen = g.Instance.generate(5, 7, seed=2, unique=True)
    assert g.Instance.from_json(gen.to_json()).to_json() == gen.to_json()
    assert gen.certify()["status"] == "certified"
    assert all(c["holds"] for c in gen.tree_check(3))
    exact = gen.solve_bp(iterations=25)["flow"]
    approx = gen.solve_bp(iterations=25, numeric="float")["flow"]
    assert all(abs(float(Fraction(x)) - y) < 1e-9 for x, y in zip(exact, approx))

    f = g.Pwl([(0, 0), (1, -1), (3, 3)])
    h = g.Pwl([(0, 2), (2, 0)])
    conv = f.inf_convolve(h)
    assert conv.domain() == ("0", "5")
    assert conv.minimum() == ("-1", "3", "3"), conv
    split = g.Pwl.split_sum([f, h], "5/2")
    assert sum(Fraction(s) for s in split) == Fraction(5, 2)
    assert Fraction(f.eval(split[0])) + Fraction(h.eval(split[1])) == Fraction(conv.eval("5/2"))
    assert f.affine_precompose(2, 0).domain() == ("0", "3/2")
    assert f.normalize().minimum()[0] == "0"

    try:
        g.Pwl([(0, 0), (1, 1), (2, 0)])
    except ValueError:
        pass
    else:
        raise AssertionError("non-convex breakpoints accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
