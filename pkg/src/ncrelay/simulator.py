"""Phase-by-phase signal-level simulation of the relay-chain protocols.

Covers the 4-hop network-coded data exchange and training round, the 2N-hop
generalization (pilot relay chain plus a pipelined data exchange with echo
cancellation at every interior relay), and the point-to-point baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, Gains, composite_theta
from .numeric import RngStream, sample_cgauss, projection_onto_columns
from .training import TrainingSet

AESNR_CAP_DB = 300.0


def _gen(rng):
    return rng.generator() if isinstance(rng, RngStream) else rng


# ---------------------------------------------------------------------------
# 4-hop training round


@dataclass
class RelaySelfEstimate:
    """LS estimate at the middle relay of [h1*h2, g1*g2, a1*h2^2 + a2*g2^2]."""

    h_r1_hat: np.ndarray


@dataclass
class FourHopTrainingObservation:
    r1: np.ndarray
    r2: np.ndarray
    r3: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    z3: np.ndarray
    true_theta: tuple[complex, complex]
    relay_estimate: RelaySelfEstimate
    n_tilde: np.ndarray       # equivalent noise in z3 w.r.t. the signal model
    n_r: np.ndarray           # residual noise in the re-encoded broadcast


def ls_estimate_relay(r3: np.ndarray, ts: TrainingSet, gains: Gains) -> RelaySelfEstimate:
    Tr = np.column_stack([ts.t1, ts.t2, ts.tr])
    G = Tr.conj().T @ Tr
    coef = np.linalg.solve(G, Tr.conj().T @ r3)
    lam0 = np.array([gains.alpha1, gains.alpha2, 1.0])
    return RelaySelfEstimate(h_r1_hat=coef / lam0)


def run_training_round_4hop(ch: ChannelRealization, gains: Gains, ts: TrainingSet,
                            sigma_n2: float, rng) -> FourHopTrainingObservation:
    """One complete 4-phase training round, returning every reception."""
    gen = _gen(rng)
    L = ts.L
    h1, h2 = ch.h[0], ch.h[1]
    g1, g2 = ch.g[0], ch.g[1]
    a1, a2 = gains.alpha1, gains.alpha2
    at3 = gains.alpha3_tilde

    n11 = sample_cgauss(L, sigma_n2, gen)
    n21 = sample_cgauss(L, sigma_n2, gen)
    nz1 = sample_cgauss(L, sigma_n2, gen)
    nz2 = sample_cgauss(L, sigma_n2, gen)
    n31 = sample_cgauss(L, sigma_n2, gen)
    n12 = sample_cgauss(L, sigma_n2, gen)
    nz3 = sample_cgauss(L, sigma_n2, gen)

    # phase 1: end nodes send t1/t2, middle relay sends tr
    r1 = h1 * ts.t1 + h2 * ts.tr + n11
    r2 = g1 * ts.t2 + g2 * ts.tr + n21
    # phase 2: first-ring relays amplify and broadcast
    z1 = a1 * h1 * r1 + nz1
    z2 = a2 * g1 * r2 + nz2
    r3 = a1 * h2 * r1 + a2 * g2 * r2 + n31
    # middle relay LS and re-encoded broadcast (drops the tr component)
    est = ls_estimate_relay(r3, ts, gains)
    r3_tilde = at3 * (a1 * est.h_r1_hat[0] * ts.t1 + a2 * est.h_r1_hat[1] * ts.t2)
    n_r = r3_tilde / at3 - (a1 * h1 * h2 * ts.t1 + a2 * g1 * g2 * ts.t2)
    # phases 3-4: the re-encoded pilot travels back to end node 1
    z3 = a1 * h1 * (h2 * r3_tilde + n12) + nz3

    theta = composite_theta(ch)
    signal = a1 * at3 * (a1 * theta[0] * ts.t1 + a2 * theta[1] * ts.t2)
    return FourHopTrainingObservation(
        r1=r1, r2=r2, r3=r3, z1=z1, z2=z2, z3=z3,
        true_theta=theta, relay_estimate=est, n_tilde=z3 - signal, n_r=n_r,
    )


def lmmse_h1sq(z1: np.ndarray, ts: TrainingSet, gains: Gains, sigma1_2: float,
               sigma3_2: float, sigma_n2: float) -> tuple[complex, complex]:
    """Estimate [h1^2, h1*h2] from the first-phase echo at end node 1.

    LMMSE with the known second-order statistics; falls back to an exact
    pseudo-inverse in the noiseless limit.
    """
    T1 = np.column_stack([ts.t1, ts.tr])
    A = gains.alpha1 * T1
    Rh = np.diag([2.0 * sigma1_2 ** 2, sigma1_2 * sigma3_2])
    Rz = A @ Rh @ A.conj().T + (gains.alpha1 ** 2 * sigma1_2 + 1.0) * sigma_n2 * np.eye(ts.L)
    if sigma_n2 > 0:
        w = np.linalg.solve(Rz, z1)
    else:
        w = np.linalg.pinv(Rz, hermitian=True) @ z1
    est = Rh @ A.conj().T @ w
    return complex(est[0]), complex(est[1])


# ---------------------------------------------------------------------------
# 4-hop data exchange (the faithful two-phase pipelined schedule)


@dataclass
class DataExchangeRecord:
    tx1: np.ndarray
    tx2: np.ndarray
    decoded_x2: np.ndarray    # decode of tx2[0..rounds-2] at end node 1
    desired_pow: float
    error_pow: float
    csi_mode: str
    exchanges: int

    def decode_errors(self) -> np.ndarray:
        return self.decoded_x2 - self.tx2[: len(self.decoded_x2)]


def qpsk_symbols(n: int, gen) -> np.ndarray:
    idx = gen.integers(0, 4, size=n)
    return np.exp(1j * (np.pi / 4 + np.pi / 2 * idx))


def run_data_exchange_4hop(ch: ChannelRealization, gains: Gains, rounds: int,
                           csi: str, sigma_n2: float, rng,
                           theta_hat: tuple[complex, complex] | None = None,
                           h1sq_hat: complex | None = None,
                           relay_coef_hat: complex | None = None) -> DataExchangeRecord:
    """Pipelined 4-hop exchange over `rounds` rounds (2 phases each).

    csi is 'perfect' or 'estimated'; in estimated mode the composite
    estimates must be supplied.
    """
    if rounds < 2:
        raise ValueError("need at least 2 rounds for one completed exchange")
    gen = _gen(rng)
    h1, h2 = ch.h[0], ch.h[1]
    g1, g2 = ch.g[0], ch.g[1]
    a1, a2, a3 = gains.alpha1, gains.alpha2, gains.alpha3
    at1, at2 = gains.alpha_tilde
    theta1, theta2 = composite_theta(ch)

    if csi == "perfect":
        theta_hat = (theta1, theta2)
        h1sq_hat = h1 ** 2
        relay_coef_hat = a1 * h2 ** 2 + a2 * g2 ** 2
    elif csi != "estimated":
        raise ValueError("csi must be 'perfect' or 'estimated'")
    if theta_hat is None or h1sq_hat is None or relay_coef_hat is None:
        raise ValueError("estimated mode needs theta_hat, h1sq_hat, relay_coef_hat")

    x1 = qpsk_symbols(rounds, gen)
    x2 = qpsk_symbols(rounds, gen)
    decoded = np.empty(rounds - 1, dtype=complex)
    desired_pow = 0.0
    error_pow = 0.0

    s3_prev = 0.0 + 0.0j   # middle relay's cleaned reception from previous round
    for m in range(rounds):
        gA1 = at1 if m == 0 else a1   # first-ring gains: statistical in round 1
        gA2 = at2 if m == 0 else a2
        n1A = sample_cgauss(1, sigma_n2, gen)[0]
        n2A = sample_cgauss(1, sigma_n2, gen)[0]
        ny1 = sample_cgauss(1, sigma_n2, gen)[0]
        n3B = sample_cgauss(1, sigma_n2, gen)[0]
        # phase A: end nodes transmit; middle relay broadcasts previous compound
        d1 = h1 * x1[m] + n1A + (a3 * h2 * s3_prev if m >= 1 else 0.0)
        d2 = g1 * x2[m] + n2A + (a3 * g2 * s3_prev if m >= 1 else 0.0)
        # phase B: first-ring relays broadcast; end node 1 and the middle receive
        y1 = gA1 * h1 * d1 + ny1
        d3 = gA1 * h2 * d1 + gA2 * g2 * d2 + n3B
        if m >= 1:
            gPrev1 = at1 if m == 1 else a1
            gPrev2 = at2 if m == 1 else a2
            # decode x2 of the previous round at end node 1
            num = y1 - a1 * h1sq_hat * x1[m] - a1 * a3 * gPrev1 * theta_hat[0] * x1[m - 1]
            coef_hat = a1 * a3 * gPrev2 * theta_hat[1]
            coef_true = a1 * a3 * gPrev2 * theta2
            decoded[m - 1] = num / coef_hat
            desired = coef_true * x2[m - 1]
            err = num - desired
            desired_pow += abs(desired) ** 2
            error_pow += abs(err) ** 2
            # middle relay removes its own echo before re-broadcasting
            s3_prev = d3 - a3 * relay_coef_hat * s3_prev
        else:
            s3_prev = d3
    return DataExchangeRecord(tx1=x1, tx2=x2, decoded_x2=decoded,
                              desired_pow=desired_pow, error_pow=error_pow,
                              csi_mode=csi, exchanges=rounds - 1)


def effective_snr_at_t1(record: DataExchangeRecord) -> float:
    """Post-cancellation signal-to-(residual interference plus noise) ratio
    at end node 1, in dB, for one record; capped when the denominator vanishes."""
    if record.exchanges < 1:
        raise ValueError("record holds no completed exchange")
    if record.error_pow <= record.desired_pow * 10.0 ** (-AESNR_CAP_DB / 10.0):
        return AESNR_CAP_DB
    return 10.0 * np.log10(record.desired_pow / record.error_pow)


def aesnr_components(ch: ChannelRealization, gains: Gains,
                     sigma_n2: float) -> tuple[float, float]:
    """Signal and residual-noise powers of the perfect-CSI steady-state
    exchange at end node 1, for one realization."""
    h1, h2 = ch.h[0], ch.h[1]
    g2 = ch.g[1]
    a1, a2, a3 = gains.alpha1, gains.alpha2, gains.alpha3
    _, theta2 = composite_theta(ch)
    S = (a1 * a2 * a3) ** 2 * abs(theta2) ** 2
    N = sigma_n2 * (a1 ** 2 * abs(h1) ** 2
                    + a1 ** 2 * a3 ** 2 * abs(h1 * h2) ** 2
                    * (a1 ** 2 * abs(h2) ** 2 + a2 ** 2 * abs(g2) ** 2 + 1.0)
                    + 1.0)
    return float(S), float(N)


def aesnr_theoretical(ch: ChannelRealization, gains: Gains, sigma_n2: float) -> float:
    """Perfect-CSI steady-state effective SNR (linear) for one realization."""
    S, N = aesnr_components(ch, gains, sigma_n2)
    if N == 0:
        return 10.0 ** (AESNR_CAP_DB / 10.0)
    return S / N


def spectral_efficiency_ratio() -> float:
    """Exchange-cycle accounting: the network-coded schedule completes a
    bidirectional exchange in 4 phases versus 8 for point-to-point."""
    return (2.0 / 4.0) / (2.0 / 8.0)


# ---------------------------------------------------------------------------
# 2N-hop generalization


@dataclass
class MultihopGains:
    """Per-relay gains of a 2N-hop chain.

    fwd_h[k] is the gain of the k-th relay on the side of end node 1
    (k = 1..N-1), mid the middle relay's re-encoding gain, ret_h the gains
    applied on the return path (usually equal to fwd_h).
    """

    fwd_h: np.ndarray
    fwd_g: np.ndarray
    mid: float
    ret_h: np.ndarray

    @classmethod
    def unity(cls, N: int) -> "MultihopGains":
        ones = np.ones(N - 1)
        return cls(fwd_h=ones.copy(), fwd_g=ones.copy(), mid=1.0, ret_h=ones.copy())

    @classmethod
    def fourhop(cls, gains: Gains) -> "MultihopGains":
        return cls(fwd_h=np.array([gains.alpha1]), fwd_g=np.array([gains.alpha2]),
                   mid=gains.alpha3_tilde, ret_h=np.array([gains.alpha1]))

    def signal_coefs(self) -> tuple[float, float]:
        c1 = np.prod(self.fwd_h) * self.mid * np.prod(self.ret_h)
        c2 = np.prod(self.fwd_g) * self.mid * np.prod(self.ret_h)
        return float(c1), float(c2)


@dataclass
class MultihopTrainingResult:
    z1N: np.ndarray
    true_varpi: tuple[complex, complex]
    h1sq_hat: complex
    coef1: float        # deterministic gain multiplying varpi1 in z1N
    coef2: float


def run_training_2Nhop(ch: ChannelRealization, ts: TrainingSet, N: int,
                       sigma_n2: float, rng,
                       mh_gains: MultihopGains | None = None) -> MultihopTrainingResult:
    """Hop-by-hop pilot relay through a 2N-hop chain.

    The middle relay LS-estimates the two pilot coefficients, re-encodes
    t1/t2 only, and the compound travels back to end node 1.  For N=2 with
    gains from MultihopGains.fourhop this reproduces the 4-hop round
    observation for observation z3 exactly (same draw order).
    """
    if N < 2:
        raise ValueError("need N >= 2")
    if len(ch.h) < N:
        raise ValueError("realization has too few hops")
    gen = _gen(rng)
    if mh_gains is None:
        mh_gains = MultihopGains.unity(N)
    L = ts.L
    h, g = ch.h[:N], ch.g[:N]

    # forward sweep, end-node-1 side
    tx_h = []
    prev = ts.t1
    for k in range(N - 1):
        recv = h[k] * prev + sample_cgauss(L, sigma_n2, gen)
        if k == N - 2:
            recv = recv + h[N - 1] * ts.tr   # the middle relay's own pilot
        tx_h.append(mh_gains.fwd_h[k] * recv)
        prev = tx_h[-1]
    # forward sweep, end-node-2 side
    tx_g = []
    prev = ts.t2
    for k in range(N - 1):
        recv = g[k] * prev + sample_cgauss(L, sigma_n2, gen)
        if k == N - 2:
            recv = recv + g[N - 1] * ts.tr
        tx_g.append(mh_gains.fwd_g[k] * recv)
        prev = tx_g[-1]

    # echo of the first relay broadcast back at end node 1
    z1_echo = h[0] * tx_h[0] + sample_cgauss(L, sigma_n2, gen)
    sample_cgauss(L, sigma_n2, gen)  # symmetric echo at end node 2 (unused)

    # middle relay reception, LS and re-encode
    mid_recv = h[N - 1] * tx_h[-1] + g[N - 1] * tx_g[-1] + sample_cgauss(L, sigma_n2, gen)
    Tr = np.column_stack([ts.t1, ts.t2, ts.tr])
    coef = np.linalg.solve(Tr.conj().T @ Tr, Tr.conj().T @ mid_recv)
    r_tilde = mh_gains.mid * (coef[0] * ts.t1 + coef[1] * ts.t2)

    # return sweep toward end node 1
    b = r_tilde
    for k in range(N - 2, -1, -1):
        recv = h[k + 1] * b + sample_cgauss(L, sigma_n2, gen)
        b = mh_gains.ret_h[k] * recv
    z1N = h[0] * b + sample_cgauss(L, sigma_n2, gen)

    # end node 1 recovers its own squared first-hop gain from the echo
    T1 = np.column_stack([ts.t1, ts.tr])
    c_echo = np.linalg.solve(T1.conj().T @ T1, T1.conj().T @ z1_echo)
    h1sq_hat = complex(c_echo[0] / mh_gains.fwd_h[0])

    varpi1 = complex(np.prod(h ** 2))
    varpi2 = complex(np.prod(h * g))
    c1, c2 = mh_gains.signal_coefs()
    return MultihopTrainingResult(z1N=z1N, true_varpi=(varpi1, varpi2),
                                  h1sq_hat=h1sq_hat, coef1=c1, coef2=c2)


def varpi_ls_estimate(z1N: np.ndarray, ts: TrainingSet, coef1: float,
                      coef2: float) -> tuple[complex, complex]:
    """Decorrelating LS estimate of the two 2N-hop composites."""
    T = np.column_stack([ts.t1, ts.t2])
    c = np.linalg.solve(T.conj().T @ T, T.conj().T @ z1N)
    return complex(c[0] / coef1), complex(c[1] / coef2)


@dataclass
class MultihopDataResult:
    tx1: np.ndarray
    tx2: np.ndarray
    decoded_x2: np.ndarray
    exchanges: int


def _chain_arrays(ch: ChannelRealization, N: int, mh_gains: MultihopGains):
    """Per-link channels c[k] (link between nodes k and k+1) and per-relay
    gains indexed by node-1, for the node chain 0..2N with the middle at N."""
    h, g = ch.h[:N], ch.g[:N]
    c = np.concatenate([h, g[::-1]])
    gains_by_node = np.concatenate([mh_gains.fwd_h, [mh_gains.mid], mh_gains.fwd_g[::-1]])
    return c, gains_by_node


def _relay_echo_pairs(p: int, N: int):
    """Relay neighbors whose reflection of relay p's broadcast must be
    removed: only the outward neighbor (toward the nearer end node) for
    ordinary relays, both neighbors for the middle relay.  Reflections off
    the inward neighbor are legitimate network-coded content that travels on
    to the end node and is canceled there with composite parameters."""
    if p == N:
        return [p - 1, p + 1]
    out = p - 1 if p < N else p + 1
    return [out] if 1 <= out <= 2 * N - 1 else []


def multihop_cancel_coefs(ch: ChannelRealization, N: int,
                          mh_gains: MultihopGains) -> np.ndarray:
    """True per-relay echo-cancellation coefficients."""
    c, gains_by_node = _chain_arrays(ch, N, mh_gains)
    cancel = np.zeros(2 * N + 1, dtype=complex)
    for p in range(1, 2 * N):
        acc = 0.0 + 0.0j
        for q in _relay_echo_pairs(p, N):
            acc += gains_by_node[q - 1] * c[min(p, q)] ** 2
        cancel[p] = gains_by_node[p - 1] * acc
    return cancel


def multihop_depth_coefficients(theta: np.ndarray, gains_by_node: np.ndarray,
                                N: int) -> np.ndarray:
    """Self-interference coefficients A_j at end node 1: the depth-j echo of
    its own symbol carries theta[j-1] = prod_{i<=j} h_i^2 times the gain of
    node j once and the gains of nodes 1..j-1 twice (out and back)."""
    A = np.empty(N, dtype=complex)
    for j in range(1, N + 1):
        gprod = np.prod(gains_by_node[: j - 1]) if j > 1 else 1.0
        A[j - 1] = theta[j - 1] * gains_by_node[j - 1] * gprod ** 2
    return A


@dataclass
class MultihopCsi:
    """Everything end node 1 and the relays need for the 2N-hop exchange."""

    theta: np.ndarray          # partial composites prod_{i<=j} h_i^2, j=1..N
    varpi2: complex            # full cross composite prod h_i g_i
    cancel: np.ndarray         # per-node echo coefficients

    @classmethod
    def perfect(cls, ch: ChannelRealization, N: int,
                mh_gains: MultihopGains) -> "MultihopCsi":
        h, g = ch.h[:N], ch.g[:N]
        theta = np.cumprod(h ** 2)
        return cls(theta=theta, varpi2=complex(np.prod(h * g)),
                   cancel=multihop_cancel_coefs(ch, N, mh_gains))


def run_data_exchange_2Nhop(ch: ChannelRealization, N: int, rounds: int,
                            csi: str, sigma_n2: float, rng,
                            mh_gains: MultihopGains | None = None,
                            csi_bundle: MultihopCsi | None = None) -> MultihopDataResult:
    """Pipelined data exchange over a 2N-hop chain.

    Each relay removes the reflections of its own broadcast per
    _relay_echo_pairs, which decouples the two traveling waves exactly; end
    node 1 then observes depth-j echoes of its own symbols for j = 1..N plus
    the single through-path from end node 2, and cancels them with the
    composite parameters in the CSI bundle.  Nodes are indexed 0..2N.
    """
    if N < 2 or rounds < 1:
        raise ValueError("need N >= 2 and rounds >= 1")
    gen = _gen(rng)
    if mh_gains is None:
        mh_gains = MultihopGains.unity(N)
    c, gains_by_node = _chain_arrays(ch, N, mh_gains)

    if csi == "perfect":
        csi_bundle = MultihopCsi.perfect(ch, N, mh_gains)
    elif csi != "estimated":
        raise ValueError("csi must be 'perfect' or 'estimated'")
    if csi_bundle is None:
        raise ValueError("estimated mode needs a csi_bundle")

    A = multihop_depth_coefficients(csi_bundle.theta, gains_by_node, N)
    gtot = complex(np.prod(gains_by_node))
    through = gtot * csi_bundle.varpi2

    n_nodes = 2 * N + 1
    n_tx_rounds = rounds + N
    x1 = qpsk_symbols(n_tx_rounds, gen)
    x2 = qpsk_symbols(n_tx_rounds, gen)

    s_store = np.zeros(n_nodes, dtype=complex)
    decoded = []
    n_phases = 2 * (rounds + N - 1)
    for ph in range(1, n_phases + 1):
        odd = ph % 2 == 1
        tx_now = np.zeros(n_nodes, dtype=complex)
        for p in range(n_nodes):
            if (p % 2 == 0) == odd:   # even-distance nodes transmit on odd phases
                if p == 0:
                    r = (ph + 1) // 2
                    tx_now[p] = x1[r - 1] if r <= n_tx_rounds else 0.0
                elif p == 2 * N:
                    r = (ph + 1) // 2
                    tx_now[p] = x2[r - 1] if r <= n_tx_rounds else 0.0
                else:
                    tx_now[p] = gains_by_node[p - 1] * s_store[p]
        # receptions at the complementary-parity nodes
        for p in range(n_nodes):
            if (p % 2 == 0) == odd:
                continue
            recv = 0.0 + 0.0j
            if p > 0:
                recv += c[p - 1] * tx_now[p - 1]
            if p < 2 * N:
                recv += c[p] * tx_now[p + 1]
            recv += sample_cgauss(1, sigma_n2, gen)[0]
            if 1 <= p <= 2 * N - 1:
                s_store[p] = recv - csi_bundle.cancel[p] * s_store[p]
            elif p == 0 and ph % 2 == 0:
                k = ph // 2
                m = k - N + 1              # index of the arriving x2 symbol
                if 1 <= m <= rounds:
                    num = recv
                    for j in range(1, N + 1):
                        num = num - A[j - 1] * x1[k - j]
                    decoded.append(num / through)

    decoded = np.array(decoded, dtype=complex)
    return MultihopDataResult(tx1=x1[:rounds], tx2=x2[:rounds],
                              decoded_x2=decoded, exchanges=len(decoded))


def multihop_echo_probe(ch: ChannelRealization, N: int, sigma_n2: float, rng,
                        ts: TrainingSet,
                        mh_gains: MultihopGains | None = None) -> np.ndarray:
    """Per-relay LS estimates of the echo-cancellation coefficients, obtained
    from a dedicated relay-pilot exchange with the reflecting neighbors."""
    gen = _gen(rng)
    if mh_gains is None:
        mh_gains = MultihopGains.unity(N)
    c, gains_by_node = _chain_arrays(ch, N, mh_gains)
    est = np.zeros(2 * N + 1, dtype=complex)
    Qr = ts.Qr
    for p in range(1, 2 * N):
        acc = 0.0 + 0.0j
        for q in _relay_echo_pairs(p, N):
            cc = c[min(p, q)]
            n1 = sample_cgauss(ts.L, sigma_n2, gen)
            n2 = sample_cgauss(ts.L, sigma_n2, gen)
            recv = gains_by_node[q - 1] * cc ** 2 * ts.tr \
                + gains_by_node[q - 1] * cc * n1 + n2
            acc += np.vdot(ts.tr, recv) / Qr
        est[p] = gains_by_node[p - 1] * acc
    return est


def multihop_pilot_csi(ch: ChannelRealization, ts: TrainingSet, N: int,
                       sigma_n2: float, rng,
                       mh_gains: MultihopGains | None = None) -> MultihopCsi:
    """CSI acquisition for the 2N-hop exchange from pilot rounds.

    The relays first estimate their echo coefficients from dedicated probes,
    then both end nodes drive their pilots through the live chain; end node 1
    peels the depth-j echo coefficients off its successive receptions and
    reads the cross composite from the first through-arrival.
    """
    if N < 2:
        raise ValueError("need N >= 2")
    gen = _gen(rng)
    if mh_gains is None:
        mh_gains = MultihopGains.unity(N)
    c, gains_by_node = _chain_arrays(ch, N, mh_gains)
    cancel_hat = multihop_echo_probe(ch, N, sigma_n2, gen, ts, mh_gains)

    L = ts.L
    n_nodes = 2 * N + 1
    s_store = np.zeros((n_nodes, L), dtype=complex)
    recvs = {}
    for ph in range(1, 2 * N + 1):
        odd = ph % 2 == 1
        tx_now = np.zeros((n_nodes, L), dtype=complex)
        for p in range(n_nodes):
            if (p % 2 == 0) == odd:
                if p == 0:
                    tx_now[p] = ts.t1
                elif p == 2 * N:
                    tx_now[p] = ts.t2
                else:
                    tx_now[p] = gains_by_node[p - 1] * s_store[p]
        for p in range(n_nodes):
            if (p % 2 == 0) == odd:
                continue
            recv = np.zeros(L, dtype=complex)
            if p > 0:
                recv = recv + c[p - 1] * tx_now[p - 1]
            if p < 2 * N:
                recv = recv + c[p] * tx_now[p + 1]
            recv = recv + sample_cgauss(L, sigma_n2, gen)
            if 1 <= p <= 2 * N - 1:
                s_store[p] = recv - cancel_hat[p] * s_store[p]
            elif p == 0:
                recvs[ph] = recv

    # peel the per-depth echo coefficients; the pilot repeats every round, so
    # the reception at phase 2j superposes all depths up to j
    A_hat = np.zeros(N, dtype=complex)
    T = np.column_stack([ts.t1, ts.t2])
    G = T.conj().T @ T
    for j in range(1, N):
        coef = np.vdot(ts.t1, recvs[2 * j]) / ts.Q1
        A_hat[j - 1] = coef - A_hat[: j - 1].sum()
    both = np.linalg.solve(G, T.conj().T @ recvs[2 * N])
    A_hat[N - 1] = both[0] - A_hat[: N - 1].sum()
    gtot = complex(np.prod(gains_by_node))
    varpi2_hat = complex(both[1] / gtot)

    theta = np.empty(N, dtype=complex)
    for j in range(1, N + 1):
        gprod = np.prod(gains_by_node[: j - 1]) if j > 1 else 1.0
        theta[j - 1] = A_hat[j - 1] / (gains_by_node[j - 1] * gprod ** 2)
    return MultihopCsi(theta=theta, varpi2=varpi2_hat, cancel=cancel_hat)


# ---------------------------------------------------------------------------
# point-to-point baseline


def point_to_point_baseline(ch: ChannelRealization, ts: TrainingSet,
                            sigma_n2: float, rng) -> tuple[complex, complex]:
    """Per-hop scalar LS over 8 dedicated phases, then composite products."""
    gen = _gen(rng)
    hops = [ch.h[0], ch.h[1], ch.g[0], ch.g[1]]
    est = []
    for hop in hops:
        n = sample_cgauss(ts.L, sigma_n2, gen)
        r = hop * ts.t1 + n
        est.append(np.vdot(ts.t1, r) / ts.Q1)
    h1e, h2e, g1e, g2e = est
    return complex(h1e ** 2 * h2e ** 2), complex(h1e * h2e * g1e * g2e)
