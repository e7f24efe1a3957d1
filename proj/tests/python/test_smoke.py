import math
import os
import subprocess

import pytest

import mraloha as m


def test_slotted_aloha():
    r = m.throughput(m.SystemParams(g=1.0, k=1))
    assert r.value == pytest.approx(math.exp(-1), rel=1e-15)
    assert r.method == m.ThroughputMethod.series


def test_closed_form_matches_series():
    cache = m.HCache()
    p = m.SystemParams(g=2.0, k=5, eps_u=0.4, eps_d=0.2, delta=0.6)
    assert abs(m.throughput_closed(p, cache).value - m.throughput_series(p).value) < 1e-9
    assert abs(m.bound_closed(2.0, 5, 0.4, cache).value - m.bound_series(2.0, 5, 0.4).value) < 1e-10
    assert m.throughput(p).value <= m.bound(2.0, 5, 0.4).value


def test_ancillary_h():
    cache = m.HCache()
    for x in (0.0, 0.5, 3.0):
        assert m.ancillary_h(1, x, cache) == pytest.approx(x * math.exp(x), rel=1e-13, abs=1e-300)
        assert m.ancillary_h(4, x, cache) == pytest.approx(m.ancillary_h_oracle(4, x), rel=1e-10, abs=1e-300)


def test_two_relay_optimum():
    assert m.delta_star_k2(0.0, 0.0) == 0.5
    assert m.s_star_k2(0.0, 0.0) == pytest.approx(1 / (2 * math.e), rel=1e-14)
    r = m.optimize_delta(m.peak_load(0.0), 2, 0.0, 0.0)
    assert r.method == m.OptimizationMethod.closed_form_k2
    assert r.arg_star == 0.5


def test_optimize_k():
    r = m.optimize_k(m.LoadRule.peak(), 0.5, 0.5, k_max=8)
    assert r.arg_star == 4
    assert len(r.per_k_value) == 8


def test_simulate():
    p = m.SystemParams(g=1.0, k=1)
    s = m.simulate(m.SimConfig(p, n_slots=200_000, seed=3))
    assert abs(s.throughput_estimate - math.exp(-1)) <= 3 * s.ci95_halfwidth
    assert s.rng == "philox4x32-10"
    again = m.simulate(m.SimConfig(p, n_slots=200_000, seed=3))
    assert again.delivered_packets == s.delivered_packets


def test_errors():
    with pytest.raises(ValueError):
        m.SystemParams(g=1.0, k=0)
    with pytest.raises(m.SingularityError):
        m.throughput_closed(m.SystemParams(g=1.0, k=2, eps_u=0.0), m.HCache())
    with pytest.raises(m.InvalidConfigError):
        m.simulate(m.SimConfig(m.SystemParams(), n_slots=0))


def test_figure_csv():
    text = m.figure_csv(m.FigureId.fig5)
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    assert lines[0] == "eps,k,g,S_star,delta_star,S_bound"
    assert len(lines) == 1 + 3 * 32


@pytest.mark.skipif("MRALOHA_CLI" not in os.environ, reason="CLI path not provided")
def test_cli():
    cli = os.environ["MRALOHA_CLI"]
    out = subprocess.run([cli, "eval", "--g", "1", "--k", "1"], capture_output=True, text=True)
    assert out.returncode == 0
    rows = [line for line in out.stdout.splitlines() if not line.startswith("#")]
    assert len(rows) == 2
    bad = subprocess.run([cli, "eval", "--eps-u", "2"], capture_output=True, text=True)
    assert bad.returncode == 2
