import numpy as np
import numpy.testing as npt
import pytest

from ncrelay.channel import (ChannelRealization, PowerProfile, ThetaStatistics,
                             composite_theta, compute_gains, draw_channels,
                             noise_cov_z3)
from ncrelay.numeric import RngStream
from ncrelay.simulator import run_training_round_4hop
from ncrelay.training import build_training


class TestPowerProfile:
    def test_equal_power_shapes(self):
        p = PowerProfile.equal_power(2.0, sigma_n2=0.5, n_pairs=3, sigma2=1.5)
        assert p.n_pairs == 3
        assert len(p.Pr) == 5
        assert len(p.sigma2) == 6

    def test_validation(self):
        with pytest.raises(ValueError):
            PowerProfile(P1=0.0, P2=1.0, Pr=(1.0,) * 3, sigma2=(1.0,) * 4, sigma_n2=1.0)
        with pytest.raises(ValueError):
            PowerProfile(P1=1.0, P2=1.0, Pr=(1.0,) * 2, sigma2=(1.0,) * 4, sigma_n2=1.0)
        with pytest.raises(ValueError):
            PowerProfile(P1=1.0, P2=1.0, Pr=(1.0,) * 3, sigma2=(1.0,) * 4, sigma_n2=-1.0)


class TestGains:
    def test_identities(self):
        p = PowerProfile.equal_power(3.0, sigma_n2=0.7, sigma2=1.2)
        G = compute_gains(p, L=8)
        s1, s2, s3, s4 = p.sigma2
        npt.assert_allclose(G.xi, 1.0 + G.alpha1 ** 2 * s1)
        npt.assert_allclose(G.eps, 2.0 * G.alpha1 ** 2 * s3 + G.alpha2 ** 2 * s4 + 1.0)
        npt.assert_allclose(G.a0, G.alpha1 ** 2 * G.alpha3_tilde ** 2 * G.eps / G.xi)

    def test_first_ring_power_constraint(self):
        """alpha1 normalizes the average received power at the first relay."""
        p = PowerProfile.equal_power(3.0, sigma_n2=0.7, sigma2=1.2)
        G = compute_gains(p)
        s1, _, s3, _ = p.sigma2
        recv = p.P1 * s1 + p.Pr[2] * s3 + p.sigma_n2
        npt.assert_allclose(G.alpha1 ** 2 * recv, p.Pr[0])

    def test_round_one_gains_exclude_middle(self):
        p = PowerProfile.equal_power(3.0, sigma_n2=0.7, sigma2=1.2)
        G = compute_gains(p)
        at1, at2 = G.alpha_tilde
        npt.assert_allclose(at1 ** 2 * (p.P1 * p.sigma2[0] + p.sigma_n2), p.Pr[0])
        npt.assert_allclose(at2 ** 2 * (p.P2 * p.sigma2[1] + p.sigma_n2), p.Pr[1])


class TestDrawChannels:
    def test_per_hop_variance(self):
        p = PowerProfile(P1=1.0, P2=1.0, Pr=(1.0,) * 3,
                         sigma2=(0.5, 1.0, 1.5, 2.0), sigma_n2=1.0)
        gen = RngStream(11).generator()
        acc = np.zeros(4)
        n = 20_000
        for _ in range(n):
            ch = draw_channels(p, 2, gen)
            acc += [abs(ch.h[0]) ** 2, abs(ch.g[0]) ** 2,
                    abs(ch.h[1]) ** 2, abs(ch.g[1]) ** 2]
        npt.assert_allclose(acc / n, [0.5, 1.0, 1.5, 2.0], rtol=0.05)

    def test_composite_theta(self):
        ch = ChannelRealization(h=np.array([1 + 1j, 2.0]), g=np.array([0.5j, 3.0]))
        t1, t2 = composite_theta(ch)
        npt.assert_allclose(t1, (1 + 1j) ** 2 * 4.0)
        npt.assert_allclose(t2, (1 + 1j) * 2.0 * 0.5j * 3.0)


class TestNoiseCovZ3:
    def test_monte_carlo_covariance(self):
        """The assumed equivalent-noise covariance matches the simulated one."""
        p = PowerProfile.equal_power(2.0, sigma_n2=0.8, sigma2=1.0)
        gains = compute_gains(p, L=6)
        ts = build_training(6, 0.4, 12.0, 12.0, 12.0)
        stats = ThetaStatistics.from_profile(p)
        gen = RngStream(21).generator()
        n_mc = 30_000
        acc = np.zeros((6, 6), dtype=complex)
        for _ in range(n_mc):
            ch = draw_channels(p, 2, gen)
            obs = run_training_round_4hop(ch, gains, ts, p.sigma_n2, gen)
            acc += np.outer(obs.n_tilde, obs.n_tilde.conj())
        emp = acc / n_mc
        model = noise_cov_z3(ts, gains, stats, p.sigma_n2)
        scale = np.abs(model).max()
        npt.assert_allclose(emp / scale, model / scale, atol=0.05)

    def test_structure(self):
        p = PowerProfile.equal_power(2.0, sigma_n2=0.8, sigma2=1.0)
        gains = compute_gains(p, L=8)
        ts = build_training(8, 0.0, 16.0, 16.0, 16.0)
        stats = ThetaStatistics.from_profile(p)
        R = noise_cov_z3(ts, gains, stats, p.sigma_n2)
        npt.assert_allclose(R, R.conj().T, atol=1e-14)
        w = np.linalg.eigvalsh(R)
        assert w.min() > 0
        # identity part plus a rank-2 bump on the pilot subspace
        npt.assert_allclose(sorted(w)[:6], [p.sigma_n2 * gains.xi] * 6, rtol=1e-12)
