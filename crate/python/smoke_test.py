"""Smoke test for the fibersr Python bindings; exits non-zero on the first failure."""

import math

import fibersr_py as fs


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    rates = fs.DecayRates(0.26, 1.06)
    assert fs.DecayRates.at_distance(100.0).gamma_guided == rates.gamma_guided
    close(rates.eta, 0.26 / 1.06, 1e-15)

    close(fs.collective_rate(100, rates), 27.06, 1e-12)
    close(fs.symmetric_fraction(100, rates), 0.9608, 1e-4)
    close(fs.cooperativity_length(100, rates), 0.33, 0.01)

    t_max, i_max = fs.meanfield_peak(10, rates, 10.0)
    close(t_max, 0.3194, 1e-4)
    close(i_max, 7.222, 1e-3)
    p_half = fs.product_population(10, math.pi / 2)
    assert fs.meanfield_peak(10, rates, p_half) is None
    mf = fs.MeanFieldParams(100, rates, 100.0)
    close(mf.population(0.0), 100.0, 1e-12)

    traj = fs.evolve("dicke", 100, rates, init="symmetric")
    for t, p in zip(traj.times, traj.population):
        close(p, math.exp(-27.06 * t), 1e-6)

    exact = fs.evolve("exact", 4, rates, init="product", theta=0.7)
    dicke = fs.evolve("dicke", 4, rates, init="product", theta=0.7)
    for a, b in zip(exact.i_guided, dicke.i_guided):
        close(a, b, 1e-7)
    assert exact.budget_residual() < 1e-4

    try:
        fs.evolve("exact", 20, rates)
    except fs.FiberSrError as e:
        assert "bytes" in str(e)
    else:
        raise AssertionError("exact solver accepted 20 atoms")

    print("smoke test passed")


if __name__ == "__main__":
    main()
