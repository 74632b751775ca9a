"""Smoke test for the porox Python module.

Build and install first:
    cd crates/py && maturin build --release -o dist
    pip install --no-build-isolation dist/porox-*.whl
"""

import math

import porox


def main():
    assert "degSmooth" in porox.CASES

    case = porox.Case("nondeg2d")
    mesh = porox.Mesh(case, 4)
    assert mesh.shape == "quad" and mesh.num_elements == 16

    problem = porox.Problem(mesh, case, 2, tau="upwind")
    sol = problem.solve()
    mono = problem.solve_monolithic()
    cond = sol.to_vector()
    assert max(abs(a - b) for a, b in zip(mono, cond)) < 1e-10
    assert problem.conservation_residual(sol) < 1e-9

    x = mesh.centroid(5)
    p, u = sol.eval(5, x)
    pe, ue = case.exact(x)
    assert abs(p - pe) < 0.1 and len(u) == 2

    errs, hs = [], []
    for n in (8, 16):
        m = porox.Mesh(case, n)
        e = porox.Problem(m, case, 2, tau="upwind").solve().errors(["p", "u", "pstar"])
        errs.append(e["p"])
        hs.append(m.side_length)
    rate = porox.rates(errs, hs)[1]
    assert 2.0 < rate < 3.5, rate

    smooth = porox.Case("degSmooth")
    try:
        porox.Problem(porox.Mesh(smooth, 8), smooth, 1, tau="upwind")
    except ValueError as err:
        assert "generalized" in str(err)
    else:
        raise AssertionError("upwind must be rejected on a degenerate mesh")

    sol = porox.Problem(porox.Mesh(smooth, 8), smooth, 1).solve()
    ptilde, _ = sol.unscaled(0, [-0.95, -0.95])
    assert smooth.one_phase([-0.95, -0.95]) and ptilde == 0.0
    region = ([-0.5, -0.5], [1.0, 1.0])
    e = sol.errors(["p", "ptildestar"], region=region)
    assert all(math.isfinite(v) for v in e.values())

    tables = porox.study('{"case":"degSmooth","k":1,"n":[8,16]}')
    assert len(tables) == 1 and tables[0][1]["rates"]["p"] > 1.0

    checks = porox.verify(quick=True)
    for name, value, threshold, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {value:.3e} < {threshold:.0e}")
    assert all(c[3] for c in checks)
    print("smoke test passed")


if __name__ == "__main__":
    main()
