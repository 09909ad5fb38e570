"""Smoke test for the loggas extension module.

Build and install first:  pip install --no-build-isolation ./crates/py
"""

import math
import os
import tempfile

import loggas


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    v = loggas.Potential("quadratic")
    eq = loggas.EquilibriumMeasure(v)
    a, b = eq.support
    close(b, math.sqrt(2.0), 1e-9)
    close(eq.density(0.0), math.sqrt(2.0) / math.pi, 1e-8)
    close(eq.cdf(0.0), 0.5, 1e-12)
    close(eq.stieltjes(1e6j).imag, -1e-6, 1e-12)

    quartic = loggas.EquilibriumMeasure(loggas.Potential("quartic", a=1.0, b=1.0))
    close(quartic.support[1], math.sqrt((math.sqrt(13.0) - 1.0) / 3.0), 1e-8)

    close(loggas.tridiagonal_eigenvalues([0.0, 0.0], [1.0])[1], 1.0, 1e-14)

    s = loggas.sample_gaussian(64, 2.0, 200, streams=20, seed=1)
    assert len(s) == 200 and s.n == 64
    assert all(x < y for x, y in zip(s[0], s[0][1:]))

    r = loggas.rigidity(s, eq, alpha=0.1)
    assert 0.0 < r["bulk_median"] < 0.05, r["bulk_median"]

    st = loggas.stieltjes(s, v, eq, 0.1 + 0.2j)
    assert abs(st["m_hat"] - st["m"]) < 5.0 / (64 * 0.2)

    chains = loggas.run_mala(v, 2.0, 16, 4000, 1000, thin=10, n_chains=2, seed=3)
    assert len(chains) == 600
    assert all(0.3 < p < 0.9 for p in chains.acceptance)
    ref = loggas.sample_gaussian(16, 2.0, 600, seed=4)
    delta, err = loggas.compare(chains, eq, ref, eq, k=4, scaling="unfolded")
    assert abs(delta) <= max(0.05, 4.0 * err), (delta, err)

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "s.bin")
        s.save(path)
        back = loggas.SampleSet.load(path, 2.0)
        assert back.configs() == s.configs()

    try:
        loggas.Potential("quadratic", a=-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative coefficient accepted")

    print("loggas smoke test passed")


if __name__ == "__main__":
    main()
