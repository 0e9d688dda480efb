"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in pytest's terminal
summary (section "acceptance criteria").
"""
import contextlib
import json
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from coopdecoherence.bath_sim import Mode, SimConfig, evolve_delta, tau2_exact
from coopdecoherence.cli import run
from coopdecoherence.coherence_codec import decode, efficiency_max, encode, fidelity
from coopdecoherence.collective_operator import CouplingSpec, eigenspace_dims, local_eigensystem
from coopdecoherence.decoherence_rate import (
    BathSpec,
    PerModeCouplings,
    omega_squared,
    rate_collective,
    rate_general,
    rate_independent,
)
from coopdecoherence.qubit_core import PureState
from oracles import dense_A, dense_variance, ghz, plus_product

LN2 = math.log(2)
PHASE = (0.0, 0.0, 1.0)
AMPLITUDE = (1.0, 0.0, 0.0)


@contextlib.contextmanager
def criterion(number, label):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"FAIL  [{number}] {label}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
        raise
    ACCEPTANCE_LINES.append(f"PASS  [{number}] {label} ({time.perf_counter() - start:.2f}s)")


def random_triple(rng):
    return tuple(rng.normal(size=3))


def test_1_completeness_identity(capsys):
    with criterion(1, "completeness of the A eigenspaces, L = 1..10"):
        start = time.perf_counter()
        for L in range(1, 11):
            total = math.comb(2 * L, L) + 2 * sum(math.comb(2 * L, L - k) for k in range(1, L + 1))
            assert total == 2 ** (2 * L)
            table = eigenspace_dims(L)
            assert table.entries[0] == math.comb(2 * L, L)
            assert table.total == 2 ** (2 * L)
            assert run(["spectrum", "--L", str(L)]) == 0
            doc = json.loads(capsys.readouterr().out)
            assert doc["total"] == 2 ** (2 * L)
            assert sum(v for k, v in doc.items() if k not in ("total", "schema")) == 2 ** (2 * L)
        assert time.perf_counter() - start < 1.0


def test_2_coherence_preservation():
    rng = np.random.default_rng(2)
    with criterion(2, "encoded states have zero collective rate (200 states x L=1..5 x 3 couplings)"):
        start = time.perf_counter()
        couplings = {"phase": PHASE, "amplitude": AMPLITUDE, "random": random_triple(rng)}
        bath = BathSpec(((0.7, 1.1), (1.9, 0.4)), 1.3)
        worst = 0.0
        for triple in couplings.values():
            basis = local_eigensystem(triple)
            for L in range(1, 6):
                c = CouplingSpec.uniform_coupling(triple, 2 * L)
                for _ in range(200):
                    encoded = encode(PureState.random((2,) * L, rng), basis)
                    worst = max(worst, rate_collective(c, encoded, bath))
        assert worst <= 1e-12, worst
        assert time.perf_counter() - start < 10.0


def test_3_codec_round_trip():
    rng = np.random.default_rng(3)
    with criterion(3, "decode(encode(s)) fidelity >= 1 - 1e-12 for 500 states, L <= 5"):
        start = time.perf_counter()
        worst = 1.0
        for k in range(500):
            L = 1 + k % 5
            triple = (PHASE, AMPLITUDE, random_triple(rng))[k % 3]
            s = PureState.random((2,) * L, rng)
            worst = min(worst, fidelity(decode(encode(s, triple), triple), s))
        assert worst >= 1 - 1e-12, worst
        assert time.perf_counter() - start < 10.0


def test_4_general_equals_collective_when_factored():
    rng = np.random.default_rng(4)
    with criterion(4, "rate_general == rate_collective for 50 factored configurations (rel 1e-12)"):
        for k in range(50):
            L = int(rng.integers(1, 4))
            n_modes = int(rng.integers(1, 4))
            c = CouplingSpec([random_triple(rng) for _ in range(L)])
            omegas = rng.uniform(0.3, 3.0, n_modes)
            kappas = rng.normal(size=n_modes)
            T = 0.0 if k % 2 == 0 else omegas[0] / LN2
            b = BathSpec(tuple(zip(omegas, kappas)), T)
            s = PureState.random((2,) * L, rng)
            general = rate_general(PerModeCouplings.factored(c, kappas), s, b)
            collective = rate_collective(c, s, b)
            assert abs(general - collective) <= 1e-12 * abs(collective), (general, collective)


def test_5_exact_equals_general_for_non_factoring():
    rng = np.random.default_rng(5)
    with criterion(5, "tau2_exact == rate_general for 20 non-factoring configurations, n_max in {3, 6} (rel 1e-10)"):
        for _ in range(20):
            L = int(rng.integers(1, 4))
            n_modes = int(rng.integers(1, 3))
            lam = rng.normal(size=(n_modes, L, 3)) * 0.5
            omegas = rng.uniform(0.3, 3.0, n_modes)
            s = PureState.random((2,) * L, rng)
            omega0 = float(rng.uniform(0.1, 2.0))
            pm = PerModeCouplings(lam)
            # a vacuum bath has no population at the cutoff, so second moments are exact
            general = rate_general(pm, s, BathSpec(tuple((w, 0.0) for w in omegas), 0.0))
            for n_max in (3, 6):
                modes = tuple(Mode(w, 0.0, n_max) for w in omegas)
                exact = tau2_exact(SimConfig(omega0, None, modes, 0.0, (0.0,), s, pm))
                assert abs(exact - general) <= 1e-10 * general, (n_max, exact, general)


def test_6_short_time_law():
    rng = np.random.default_rng(6)
    with criterion(6, "fitted t^2 coefficient of delta(t) matches tau2_exact within 2% (10 configurations)"):
        start = time.perf_counter()
        for k in range(10):
            L = 1 + k % 2
            omega = float(rng.uniform(0.5, 2.0))
            T = 0.0 if k % 4 < 2 else omega / LN2
            triple = tuple(rng.normal(size=3) * 0.5)
            kappa = float(rng.uniform(0.3, 1.0))
            n_max = int(rng.integers(8, 16))
            omega0 = float(rng.uniform(0.2, 1.5))
            s = PureState.random((2,) * L, rng)
            c = CouplingSpec.uniform_coupling(triple, L)
            modes = (Mode(omega, kappa, n_max),)
            rate = tau2_exact(SimConfig(omega0, c, modes, T, (0.0,), s))
            # the t^3 term scales with the largest energy in H, not with sqrt(rate)
            scale = max(abs(omega0), omega * n_max, math.sqrt(rate), L * float(np.linalg.norm(triple)) * kappa * math.sqrt(n_max + 1))
            times = tuple(np.linspace(0.0, 0.01 / scale, 21))
            trace = evolve_delta(SimConfig(omega0, c, modes, T, times, s))
            assert trace.fitted_rate is not None
            assert np.all(trace.delta < 0.01)
            assert abs(trace.fitted_rate - trace.exact_rate) <= 0.02 * trace.exact_rate, (trace.fitted_rate, trace.exact_rate)
        assert time.perf_counter() - start < 60.0


def test_7_scaling_contrast():
    b = BathSpec(((1.0, 0.8), (2.5, 0.3)), 0.9)
    om2 = omega_squared(b)
    rng = np.random.default_rng(7)
    with criterion(7, "independent rate = Omega^2 L, GHZ collective = Omega^2 L^2, encoded = 0 (L = 1..8)"):
        for L in range(1, 9):
            c = CouplingSpec.uniform_coupling(PHASE, L)
            product = PureState.qubits(plus_product(L))
            assert rate_independent(c, product, b) == pytest.approx(om2 * L, rel=1e-12)
            g = PureState.qubits(ghz(L))
            expected = om2 * L * L
            if L <= 4:
                expected = om2 * dense_variance(dense_A([PHASE] * L), ghz(L))
                assert expected == pytest.approx(om2 * L * L, rel=1e-12)
            assert rate_collective(c, g, b) == pytest.approx(expected, rel=1e-12)
            if L % 2 == 0:
                encoded = encode(PureState.random((2,) * (L // 2), rng), c)
                assert rate_collective(c, encoded, b) <= 1e-12


def test_8_pure_dephasing_versus_amplitude_damping():
    rng = np.random.default_rng(8)
    with criterion(8, "codewords: purity >= 1 - 1e-10 to Omega t = 10 under dephasing; delta > 1e-6 at Omega t = 1 under loss"):
        for L in (1, 2):
            c = CouplingSpec.uniform_coupling((0.0, 0.0, 0.7), 2 * L)
            modes = (Mode(1.0, 0.9, 8),)
            b = BathSpec(((1.0, 0.9),), 1.0 / LN2)
            om = math.sqrt(omega_squared(b))
            s = encode(PureState.random((2,) * L, rng), c)
            times = tuple(np.linspace(0.0, 10.0 / om, 101))
            trace = evolve_delta(SimConfig(1.0, c, modes, 1.0 / LN2, times, s))
            assert np.min(trace.purity) >= 1 - 1e-10

        c = CouplingSpec.uniform_coupling(AMPLITUDE, 2)
        modes = (Mode(1.0, 0.5, 12),)
        om = math.sqrt(omega_squared(BathSpec(((1.0, 0.5),), 0.0)))
        s = encode(PureState.random((2,), rng), c)
        cfg = SimConfig(1.0, c, modes, 0.0, (0.0, 0.5 / om, 1.0 / om), s)
        assert tau2_exact(cfg) <= 1e-10
        assert rate_collective(c, s, BathSpec(((1.0, 0.5),), 0.0)) <= 1e-12
        trace = evolve_delta(cfg)
        assert trace.delta[-1] > 1e-6, trace.delta


def test_9_efficiency():
    with criterion(9, "eta(1) = 0.5, eta(10) = log2(184756)/20, |eta(512) - asymptote| < 0.005, monotone"):
        assert efficiency_max(1).eta == 0.5
        assert abs(efficiency_max(10).eta - math.log2(math.comb(20, 10)) / 20) <= 1e-12
        assert math.comb(20, 10) == 184756
        assert abs(efficiency_max(512).eta - (1 - math.log2(512 * math.pi) / 2048)) < 0.005
        etas = [efficiency_max(L).eta for L in range(1, 513)]
        assert all(b > a for a, b in zip(etas, etas[1:])) and etas[-1] < 1
