"""Smoke test for the qcpd extension module.

Build and install first, e.g. from the repository root:

    pip install --no-build-isolation ./crates/py
    python python/smoke_test.py
"""

import math

import qcpd


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    amp_h, amp_v = qcpd.make_mutated_state(0.604)
    assert close(amp_h**2, 0.604) and close(amp_h**2 + amp_v**2, 1.0)

    m = qcpd.helstrom_measurement(0.5, 0.5, 0.5)
    p0, p1 = m.probabilities((1.0, 0.0))
    assert close(p0 + p1, 1.0)
    # Equal priors: average error is the Helstrom bound.
    q0, _ = m.probabilities(qcpd.make_mutated_state(0.5))
    error = 0.5 * (p1 + q0)
    assert close(error, 0.5 * (1 - math.sqrt(1 - 0.5)), 1e-12), error

    assert close(qcpd.srm_optimal_probability(2, 0.3), 0.5 * (1 + math.sqrt(0.7)), 1e-10)
    assert close(qcpd.bl_success_closed_form(20, 0.01), 1 - 0.01 + 0.01 / 20)

    exact = qcpd.exact_bi_success(4, 0.5)
    assert close(exact[0], 0.8463193467761475)

    rec = qcpd.run_trial("BI", 20, 0.604, 5, seed=3)
    assert len(rec.priors) == 21 and all(close(p, 0.05) for p in rec.priors[0])
    assert len(rec.outcomes) == 20 and 1 <= rec.guess <= 20
    again = qcpd.replay("BI", 20, 0.604, 5, rec.outcomes)
    assert again.guess == rec.guess and again.priors == rec.priors

    est = qcpd.simulate_success("BL", 20, 0.01, trials=20000, seed=1)
    assert abs(est.mean - 0.9905) < 0.003, est

    table = qcpd.sweep_overlap(8, grid=[0.2, 0.8], trials=2000, seed=1)
    assert table.axis == "c_squared" and table.axis_values == [0.2, 0.8]
    assert table.to_csv().startswith("axis,strategy,mean,std_error,trials,epsilon,seed")
    bl, bi = table.series("BL"), table.series("BI")
    assert all(b > a for a, b in zip(bl, bi))

    text, planted = qcpd.generate_events(6, 0.0, 3, frames=2, seed=4)
    assert qcpd.postselect(text, 6) == planted == [[0, 0, 1, 1, 1, 1]] * 2

    try:
        qcpd.run_trial("BI", 5, 0.5, 6)
    except ValueError:
        pass
    else:
        raise AssertionError("k > n accepted")

    print(f"qcpd {qcpd.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
