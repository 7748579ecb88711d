"""Registered verification checks.

Every check maps a :class:`CheckConfig` to a :class:`CheckResult`. Default
tolerances are the shipped acceptance values; ``config.tolerances`` overrides
them key by key in :func:`histlat.suite.runner.run_check`.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np
import scipy.linalg as sla

from .. import fock, onebody, physical, quadratic, relfield
from ..errors import InvalidArgumentError
from ..lattice import dft_matrix, make_lattice, onebody_pt, shift_matrix
from ..quadratic import QuadraticHamiltonian
from ..result import CheckResult
from .config import CheckConfig
from .registry import add_default, register


def _lat(cfg: CheckConfig, n_sites: int | None = None, dt: float | None = None):
    lc = cfg.lattice
    return make_lattice(lc.n_sites if n_sites is None else n_sites,
                        lc.dt if dt is None else dt, lc.t_start)


def _tol(cfg: CheckConfig, fermi: float, bose: float) -> float:
    return bose if cfg.engine.kind == "fock-bose" else fermi


def _history(cfg: CheckConfig, lat):
    e = cfg.engine
    if e.kind == "onebody":
        raise InvalidArgumentError(f"check {cfg.check!r} needs a Fock engine")
    return fock.history_spec(e.statistics, lat, cfg.theory.n_modes, e.n_max)


def _random_state(rng, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _small_states(cfg: CheckConfig, small, rng, count: int) -> list[np.ndarray]:
    """Seeded conventional states: random superpositions, plus coherent states for bosons."""
    alpha_max = float(cfg.options.get("alpha_max", 0.5))
    out = []
    for i in range(count):
        if small.is_fermi or i % 2 == 0:
            out.append(_random_state(rng, small.dim))
        else:
            r = alpha_max * np.sqrt(rng.uniform(size=small.n_flat))
            a = r * np.exp(2j * np.pi * rng.uniform(size=small.n_flat))
            out.append(fock.coherent_state(small, a).amplitudes)
    return out


def _random_commensurate(rng, lat, n_modes: int) -> np.ndarray:
    """Random Hermitian single-particle matrix with lattice-frequency eigenvalues."""
    kmax = max(1, lat.n_sites // 2 - 1)
    k = rng.integers(-kmax, kmax + 1, size=n_modes)
    q, _ = np.linalg.qr(rng.normal(size=(n_modes, n_modes)) + 1j * rng.normal(size=(n_modes, n_modes)))
    return q @ np.diag(2 * np.pi * k / lat.period) @ q.conj().T


# --- lattice ---------------------------------------------------------------


@register("lattice/dft", "unitary DFT, exact shift and p spectrum")
def check_dft(cfg: CheckConfig) -> CheckResult:
    lat = _lat(cfg)
    F = dft_matrix(lat)
    N = lat.n_sites
    unit = float(np.abs(F.conj().T @ F - np.eye(N)).max())
    shift = F.conj().T @ np.diag(np.exp(-1j * lat.omegas * lat.dt)) @ F
    sh = float(np.abs(shift - shift_matrix(lat)).max())
    ev = np.sort(np.linalg.eigvalsh(onebody_pt(lat)))
    spec = float(np.abs(ev - np.sort(lat.omegas)).max())
    tol = 1e-12
    return CheckResult("lattice/dft", {"unitarity": unit, "shift": sh, "spectrum": spec},
                       {"unitarity": tol, "shift": tol, "spectrum": tol},
                       metadata={"n_sites": N})


# --- diagonalization -------------------------------------------------------


def _many_body_diag(cfg: CheckConfig, lat, h) -> CheckResult:
    spec = _history(cfg, lat)
    V = fock.many_body(spec, "V", h, cfg.lattice.t0).toarray()
    J = fock.many_body(spec, "J", h)
    lhs = V.conj().T @ fock.translation(spec, -1).toarray() @ V
    rhs = fock.sector_expm(spec, J, lat.dt).toarray()
    R = lhs - rhs
    meta = {"dim": spec.dim, "engine": cfg.engine.kind, "n_sites": lat.n_sites}
    if not spec.is_fermi:
        # truncated bosons are faithful only below the total-number cutoff
        mask = spec.faithful_mask()
        meta["faithful_dim"] = int(mask.sum())
        meta["full_space_residual"] = float(np.abs(R).max())
        R = R[np.ix_(mask, mask)]
    ok, _ = quadratic.commensurability(QuadraticHamiltonian(h), lat)
    return CheckResult("diag/exponentiated", {"residual": float(np.abs(R).max())},
                       {"residual": 1e-10}, expected_nonzero=not ok, metadata=meta)


@register("diag/exponentiated", "v^dag exp(-i p dt) v = exp(-i j dt), one-body or many-body")
def check_diag_exp(cfg: CheckConfig) -> CheckResult:
    lat = _lat(cfg)
    h = cfg.theory.omega_matrix(lat)
    if cfg.engine.kind == "onebody":
        return onebody.verify_diag(lat, h, cfg.lattice.t0, "exponentiated")
    return _many_body_diag(cfg, lat, h)


@register("diag/generator", "generator form, certified by spectra modulo 2 pi / dt")
def check_diag_gen(cfg: CheckConfig) -> CheckResult:
    lat = _lat(cfg)
    return onebody.verify_diag(lat, cfg.theory.omega_matrix(lat), cfg.lattice.t0, "generator")


# --- physical subspace -----------------------------------------------------


@register("physical/kernel", "lifted states are annihilated by the quantum action", uses_rng=True)
def check_kernel(cfg: CheckConfig) -> CheckResult:
    rng = cfg.rng()
    lat = _lat(cfg)
    h = cfg.theory.omega_matrix(lat)
    spec = _history(cfg, lat)
    small = physical.small_space(spec)
    J = fock.many_body(spec, "J", h)
    worst = 0.0
    states = _small_states(cfg, small, rng, int(cfg.options.get("n_states", 20)))
    for psi in states:
        Psi = physical.lift(spec, lat, h, psi, t0=cfg.lattice.t0).amplitudes
        worst = max(worst, float(np.linalg.norm(J @ Psi)))
    return CheckResult("physical/kernel", {"residual": worst}, {"residual": _tol(cfg, 1e-10, 1e-6)},
                       metadata={"dim": spec.dim, "n_states": len(states), "engine": cfg.engine.kind})


def _coherent_overlap(a, b) -> complex:
    a, b = np.asarray(a), np.asarray(b)
    return complex(np.exp(np.sum(-0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + np.conj(a) * b)))


@register("physical/inner-product", "lift preserves inner products", uses_rng=True)
def check_inner(cfg: CheckConfig) -> CheckResult:
    rng = cfg.rng()
    lat = _lat(cfg)
    h = cfg.theory.omega_matrix(lat)
    spec = _history(cfg, lat)
    small = physical.small_space(spec)
    t0 = cfg.lattice.t0
    n_pairs = int(cfg.options.get("n_pairs", 10))
    pair_err = 0.0
    smear = _random_state(rng, lat.n_sites)
    smear_err = 0.0
    for _ in range(n_pairs):
        psi, phi = _random_state(rng, small.dim), _random_state(rng, small.dim)
        ref = np.vdot(phi, psi)
        for w, key in ((None, "pair"), (smear, "smeared")):
            Psi = physical.lift(spec, lat, h, psi, smear=w, t0=t0).amplitudes
            Phi = physical.lift(spec, lat, h, phi, smear=w, t0=t0).amplitudes
            err = abs(np.vdot(Phi, Psi) - ref)
            if key == "pair":
                pair_err = max(pair_err, err)
            else:
                smear_err = max(smear_err, err)
    tol = _tol(cfg, 1e-10, 1e-6)
    residuals = {"pair": float(pair_err), "smeared": float(smear_err)}
    if not spec.is_fermi:
        alpha_max = float(cfg.options.get("alpha_max", 0.5))
        coh = 0.0
        for _ in range(n_pairs):
            a = alpha_max * np.sqrt(rng.uniform(size=small.n_flat)) * np.exp(2j * np.pi * rng.uniform(size=small.n_flat))
            b = alpha_max * np.sqrt(rng.uniform(size=small.n_flat)) * np.exp(2j * np.pi * rng.uniform(size=small.n_flat))
            Pa = physical.lift(spec, lat, h, fock.coherent_state(small, a).amplitudes, t0=t0).amplitudes
            Pb = physical.lift(spec, lat, h, fock.coherent_state(small, b).amplitudes, t0=t0).amplitudes
            coh = max(coh, abs(np.vdot(Pb, Pa) - _coherent_overlap(b, a)))
        residuals["coherent"] = float(coh)
    return CheckResult("physical/inner-product", residuals, {k: tol for k in residuals},
                       metadata={"dim": spec.dim, "engine": cfg.engine.kind, "n_pairs": n_pairs})


@register("physical/propagator", "foliation and global propagator ratios", uses_rng=True)
def check_propagator(cfg: CheckConfig) -> CheckResult:
    rng = cfg.rng()
    lat = _lat(cfg)
    h = cfg.theory.omega_matrix(lat)
    spec = _history(cfg, lat)
    small = physical.small_space(spec)
    dt_ = float(cfg.options.get("delta_t", 1.0))
    t1 = float(cfg.options.get("t1", 0.0))
    t0 = cfg.lattice.t0
    one = np.zeros(small.dim, dtype=complex)
    one[small.index_of([1] + [0] * (small.n_flat - 1))] = 1.0
    Psi = physical.lift(spec, lat, h, one, t0=t0).amplitudes
    ref = physical.reference_propagator(small, h, one, one, dt_)
    residuals = {}
    values = {}
    for method in ("foliation", "global"):
        val = physical.propagator_ratio(spec, lat, h, Psi, Psi, t1, t1 + dt_, method, t0)
        values[method] = [val.real, val.imag]
        residuals[method] = abs(val - ref)
    cross = 0.0
    n_theories = int(cfg.options.get("n_theories", 10))
    for _ in range(n_theories):
        hr = _random_commensurate(rng, lat, small.n_flat)
        psi, phi = _random_state(rng, small.dim), _random_state(rng, small.dim)
        A = physical.lift(spec, lat, hr, psi, t0=t0).amplitudes
        B = physical.lift(spec, lat, hr, phi, t0=t0).amplitudes
        f = physical.propagator_ratio(spec, lat, hr, A, B, t1, t1 + dt_, "foliation", t0)
        g = physical.propagator_ratio(spec, lat, hr, A, B, t1, t1 + dt_, "global", t0)
        cross = max(cross, abs(f - g))
    residuals["cross_method"] = float(cross)
    tol = _tol(cfg, 1e-8, 1e-6)
    return CheckResult("physical/propagator", {k: float(v) for k, v in residuals.items()},
                       {"foliation": tol, "global": tol, "cross_method": 1e-8},
                       metadata={"dim": spec.dim, "engine": cfg.engine.kind, "reference": [ref.real, ref.imag],
                                 "values": values, "n_theories": n_theories})


@register("physical/foliation", "F(t) is unitary, fixes the vacuum and places U(t)psi at site t",
          uses_rng=True)
def check_foliation(cfg: CheckConfig) -> CheckResult:
    rng = cfg.rng()
    lat = _lat(cfg)
    h = cfg.theory.omega_matrix(lat)
    spec = _history(cfg, lat)
    small = physical.small_space(spec)
    t0 = lat.t_start if cfg.lattice.t0 is None else cfg.lattice.t0
    psi = _random_state(rng, small.dim)
    Psi = physical.lift(spec, lat, h, psi, t0=t0).amplitudes
    unit = vac = content = 0.0
    for t in lat.times:
        F = physical.foliation_unitary(spec, lat, h, t, t0).toarray()
        unit = max(unit, float(np.abs(F.conj().T @ F - np.eye(spec.dim)).max()))
        vac = max(vac, float(np.linalg.norm(F @ spec.vacuum() - spec.vacuum())))
        target = physical.site_state(spec, lat, physical.evolve_small(small, h, t, t0) @ psi, t)
        content = max(content, float(np.linalg.norm(F.conj().T @ Psi - target)))
    tol = _tol(cfg, 1e-10, 1e-8)
    return CheckResult("physical/foliation", {"unitarity": unit, "vacuum": vac, "content": content},
                       {"unitarity": tol, "vacuum": tol, "content": tol},
                       metadata={"dim": spec.dim, "engine": cfg.engine.kind})


@register("physical/observable", "translated observables reproduce Heisenberg matrix elements")
def check_observable(cfg: CheckConfig) -> CheckResult:
    lat = _lat(cfg)
    h = cfg.theory.omega_matrix(lat)
    spec = _history(cfg, lat)
    small = physical.small_space(spec)
    t = float(cfg.options.get("t", 1.0))
    t0 = cfg.lattice.t0
    if spec.is_fermi:
        psi = np.zeros(small.dim, dtype=complex)
        psi[0], psi[small.index_of([1] + [0] * (small.n_flat - 1))] = 0.6, 0.8j
        expected = physical.conventional_element(small, h, physical.quadrature, t, psi, psi)
    else:
        a = complex(*cfg.options.get("alpha", [0.3, 0.2]))
        alphas = np.zeros(small.n_flat, dtype=complex)
        alphas[0] = a
        psi = fock.coherent_state(small, alphas).amplitudes
        w0 = float(np.real(h[0, 0]))
        expected = np.sqrt(2.0) * (a * np.exp(-1j * w0 * t)).real
    Psi = physical.lift(spec, lat, h, psi, t0=t0).amplitudes
    got = physical.observable_element(spec, lat, h, physical.quadrature, t, Psi, Psi, t0)
    conv = physical.conventional_element(small, h, physical.quadrature, t, psi, psi)
    tol = _tol(cfg, 1e-10, 1e-5)
    return CheckResult("physical/observable",
                       {"element": float(abs(got - expected)), "conventional": float(abs(got - conv))},
                       {"element": tol, "conventional": tol},
                       metadata={"dim": spec.dim, "engine": cfg.engine.kind, "value": [got.real, got.imag]})


@register("physical/entropy", "lifted coherent states carry no temporal entanglement", uses_rng=True)
def check_entropy(cfg: CheckConfig) -> CheckResult:
    rng = cfg.rng()
    lat = _lat(cfg)
    h = cfg.theory.omega_matrix(lat)
    spec = _history(cfg, lat)
    small = physical.small_space(spec)
    N = lat.n_sites
    alpha_max = float(cfg.options.get("alpha_max", 0.5))
    worst = 0.0
    cuts = [c for r in range(1, N) for c in combinations(range(N), r) if 0 in c]
    for _ in range(int(cfg.options.get("n_states", 3))):
        a = alpha_max * np.sqrt(rng.uniform(size=small.n_flat)) * np.exp(2j * np.pi * rng.uniform(size=small.n_flat))
        psi = fock.coherent_state(small, a).amplitudes
        Psi = physical.lift(spec, lat, h, psi, t0=cfg.lattice.t0).amplitudes
        for cut in cuts:
            worst = max(worst, physical.temporal_entropy(spec, Psi, cut))
    residuals = {"coherent": worst}
    tolerances = {"coherent": 1e-8}
    meta = {"dim": spec.dim, "n_cuts": len(cuts)}
    # two quanta in the physical mode of a two-site lattice
    if not spec.is_fermi and spec.n_max >= 2 and small.n_flat == 1:
        lat2 = make_lattice(2, lat.dt)
        spec2 = fock.history_spec("bose", lat2, 1, 2)
        two = np.zeros(3, dtype=complex)
        two[2] = 1.0
        S = physical.temporal_entropy(spec2, physical.lift(spec2, lat2, h, two).amplitudes, [0])
        residuals["two_particle"] = float(abs(S - 1.5 * np.log(2.0)))
        tolerances["two_particle"] = 1e-9
        meta["two_particle_entropy"] = S
    return CheckResult("physical/entropy", residuals, tolerances, metadata=meta)


@register("physical/paw", "single-particle history structure and Kronecker orthogonality",
          uses_rng=True)
def check_paw(cfg: CheckConfig) -> CheckResult:
    rng = cfg.rng()
    lat = _lat(cfg)
    h = cfg.theory.omega_matrix(lat)
    freqs = np.real(np.diag(h))
    parts = physical.sp_structure_checks(lat, freqs, k_pair=tuple(cfg.options.get("k_pair", [0, 1])),
                                         t0=cfg.lattice.t0, rng=rng)
    residuals, tolerances = {}, {}
    for r in parts:
        for k, v in r.residuals.items():
            key = f"{r.name.split('/')[1]}_{k}"
            residuals[key] = v
            tolerances[key] = r.tolerances[k]
    j = onebody.build_j(lat, h).matrix
    M = h.shape[0]
    direct = np.kron(onebody_pt(lat), np.eye(M)) - np.kron(np.eye(lat.n_sites), h)
    residuals["j_bitwise"] = float(np.abs(j - direct).max())
    tolerances["j_bitwise"] = 0.0
    return CheckResult("physical/paw", residuals, tolerances,
                       metadata={"n_sites": lat.n_sites, "n_modes": M})


# --- quadratic theories ----------------------------------------------------


@register("quadratic/translate", "site translation of physical BdG operators", uses_rng=True)
def check_translate(cfg: CheckConfig) -> CheckResult:
    rng = cfg.rng()
    lat = _lat(cfg)
    H = cfg.theory.hamiltonian(lat)
    dt_ = float(cfg.options.get("delta_t", lat.dt))
    main = onebody.translate_physical(lat, H, dt_, cfg.lattice.t0)
    worst = 0.0
    M = int(cfg.options.get("random_modes", 2))
    kmax = max(1, lat.n_sites // 2 - 1)
    n_random = int(cfg.options.get("n_random", 5))
    for _ in range(n_random):
        W0 = quadratic.random_bogoliubov(rng, M)
        nu = 2 * np.pi * rng.integers(1, kmax + 1, size=M) / lat.period
        Hr = quadratic.theory_from_normal_form(W0, nu)
        worst = max(worst, onebody.translate_physical(lat, Hr, dt_, cfg.lattice.t0).residuals["residual"])
    meta = dict(main.metadata)
    meta["n_random"] = n_random
    return CheckResult("quadratic/translate", {"residual": main.residuals["residual"], "random": worst},
                       {"residual": 1e-9, "random": 1e-9}, expected_nonzero=main.expected_nonzero,
                       metadata=meta)


def _modulated(H: QuadraticHamiltonian, depth: float, period: float) -> QuadraticHamiltonian:
    w, g = H.at()
    return QuadraticHamiltonian(lambda t: w * (1 + depth * np.cos(2 * np.pi * t / period)),
                                lambda t: g * (1 + depth * np.sin(2 * np.pi * t / period)))


@register("quadratic/propagate", "symplectic W(t) and O(dt) Heisenberg residual")
def check_propagate(cfg: CheckConfig) -> CheckResult:
    lat = _lat(cfg)
    H = cfg.theory.hamiltonian(lat)
    depth = float(cfg.options.get("modulation", 0.25))
    theories = {"constant": H, "modulated": _modulated(H, depth, lat.period)}
    sym = 0.0
    orders = {}
    heis = {}
    for key, th in theories.items():
        coarse = quadratic.propagate_W(th, lat)
        fine = quadratic.propagate_W(th, _lat(cfg, 2 * lat.n_sites, lat.dt / 2))
        sym = max(sym, coarse.symplectic_residual, fine.symplectic_residual)
        heis[key] = [coarse.heisenberg_residual, fine.heisenberg_residual]
        orders[key] = float(np.log2(coarse.heisenberg_residual / fine.heisenberg_residual))
    required = float(cfg.options.get("min_order", 0.9))
    shortfall = max(0.0, required - min(orders.values()))
    return CheckResult("quadratic/propagate", {"symplectic": sym, "order_shortfall": shortfall},
                       {"symplectic": 1e-9, "order_shortfall": 0.0},
                       metadata={"orders": orders, "heisenberg": heis, "min_order": required})


# --- time operator and symmetries -----------------------------------------


@register("onebody/time-commutator", "<[p, tau] - i> on centred Gaussian packets")
def check_time_commutator(cfg: CheckConfig) -> CheckResult:
    sizes = [cfg.lattice.n_sites * 2**i for i in range(int(cfg.options.get("doublings", 2)) + 1)]
    values = []
    for n in sizes:
        lat = _lat(cfg, n)
        f = onebody.gaussian_packet(lat, lat.period / 8 if "sigma" not in cfg.options
                                    else float(cfg.options["sigma"]))
        values.append(abs(onebody.commutator_pt_time(lat, f, f)))
    decreasing = all(b < a for a, b in zip(values, values[1:]))
    return CheckResult("onebody/time-commutator",
                       {"commutator": values[0], "non_monotone": 0.0 if decreasing else 1.0},
                       {"commutator": 1e-3, "non_monotone": 0.0},
                       metadata={"sizes": sizes, "values": values})


@register("symmetry/conjugation", "constant generators commute with P_t; O(dt) conjugation identity",
          uses_rng=True)
def check_conjugation(cfg: CheckConfig) -> CheckResult:
    rng = cfg.rng()
    lat = _lat(cfg)
    M = cfg.theory.n_modes
    A = rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))
    m = 0.5 * (A + A.conj().T)
    scheme = cfg.options.get("scheme", "central")
    const = onebody.conjugation_symmetry(lat, m, scheme)
    # pairing generators in the doubled channel commute with the site shift
    K = quadratic.build_K(cfg.theory.hamiltonian(lat)) if cfg.theory.type == "quadratic" else None
    if K is None:
        B = rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))
        K = quadratic.build_K(QuadraticHamiltonian(m, B + B.T))
    Mk = K.shape[0] // 2
    G = np.kron(np.eye(lat.n_sites), quadratic.metric(Mk) @ K)
    E = sla.expm(-1j * G)
    S = onebody.bdg_shift(lat, Mk)
    bdg = float(np.abs(E @ S - S @ E).max())
    # many-body fermionic commutator
    small_lat = make_lattice(4, lat.dt)
    spec = fock.history_spec("fermi", small_lat, M)
    U = fock.gaussian_unitary(spec, np.kron(np.eye(small_lat.n_sites), m))
    Pt = fock.many_body(spec, "Pt")
    mb = float(abs(U @ Pt - Pt @ U).max())
    sizes = [lat.n_sites * 2**i for i in range(3)]
    res = []
    for n in sizes:
        fine = _lat(cfg, n, lat.period / n)
        res.append(onebody.conjugation_symmetry(fine, lambda t: t * m, scheme).residuals["conjugation"])
    order = onebody.convergence_order(res, [lat.period / n for n in sizes])
    required = float(cfg.options.get("min_order", 0.9))
    residuals = {"commutator": const.residuals["commutator"], "bdg_commutator": bdg,
                 "many_body_commutator": mb, "order_shortfall": max(0.0, required - order)}
    return CheckResult("symmetry/conjugation", residuals,
                       {"commutator": 1e-10, "bdg_commutator": 1e-10, "many_body_commutator": 1e-10,
                        "order_shortfall": 0.0},
                       metadata={"scheme": scheme, "order": order, "residuals": res, "sizes": sizes})


# --- Fock engine -----------------------------------------------------------


@register("fock/fermi-exactness", "Pauli exclusion and canonical anticommutators")
def check_fermi(cfg: CheckConfig) -> CheckResult:
    lat = _lat(cfg)
    h = cfg.theory.omega_matrix(lat)
    spec = fock.history_spec("fermi", lat, cfg.theory.n_modes)
    cre = spec.creators
    ann = spec.annihilators
    cols = physical.physical_columns(lat, h, t0=cfg.lattice.t0)
    ops = list(cre) + [fock.creation(spec, cols[:, m]) for m in range(cols.shape[1])]
    nonzero = sum(int(np.count_nonzero((B @ B).toarray())) for B in ops)
    I = np.eye(spec.dim)
    car = 0.0
    for i in range(spec.n_flat):
        for j in range(spec.n_flat):
            ac = (ann[i] @ cre[j] + cre[j] @ ann[i]).toarray()
            car = max(car, float(np.abs(ac - (i == j) * I).max()))
            aa = (ann[i] @ ann[j] + ann[j] @ ann[i]).toarray()
            car = max(car, float(np.abs(aa).max()))
    return CheckResult("fock/fermi-exactness", {"square_nonzeros": float(nonzero), "car": car},
                       {"square_nonzeros": 0.0, "car": 1e-10}, metadata={"dim": spec.dim})


@register("fock/coherent", "truncated coherent overlaps against the analytic formula")
def check_coherent(cfg: CheckConfig) -> CheckResult:
    small = fock.small_spec("bose", cfg.theory.n_modes, cfg.engine.n_max)
    a = np.full(small.n_flat, complex(*cfg.options.get("alpha", [0.5, 0.0])))
    b = np.full(small.n_flat, complex(*cfg.options.get("beta", [0.0, 0.5])))
    sa, sb = fock.coherent_state(small, a), fock.coherent_state(small, b)
    err = abs(np.vdot(sb.amplitudes, sa.amplitudes) - _coherent_overlap(b, a))
    return CheckResult("fock/coherent",
                       {"overlap_error": float(err), "eigen_residual": sa.info["eigen_residual"]},
                       {"overlap_error": 1e-6, "eigen_residual": 1e-3},
                       metadata={"dim": small.dim, "tail_weight": sa.info["tail_weight"]})


# --- relativistic scalar ---------------------------------------------------


@register("relfield/action", "action expectation, on-shell zeros and exact dispersion", uses_rng=True)
def check_relfield(cfg: CheckConfig) -> CheckResult:
    rng = cfg.rng()
    th = cfg.theory
    slat = relfield.make_spacetime(cfg.lattice.n_sites, th.n_x or cfg.lattice.n_sites,
                                   cfg.lattice.dt, th.dx or cfg.lattice.dt)
    m0 = float(th.m0)
    J = relfield.build_jrel(slat, m0)
    act = 0.0
    for _ in range(int(cfg.options.get("n_fields", 10))):
        phi = rng.normal(size=(slat.n_t, slat.n_x)) + 1j * rng.normal(size=(slat.n_t, slat.n_x))
        act = max(act, abs(relfield.action_expectation(slat, m0, phi, J)
                           - relfield.classical_action(slat, m0, phi)))
    shell = relfield.mass_shell_modes(slat, m0)
    on = 0.0
    for k, q in shell.modes:
        on = max(on, abs(relfield.action_expectation(slat, m0, relfield.plane_wave(slat, k, q), J)))
    D = slat.dispersion(m0)
    eig = 0.0
    for a, k in enumerate(slat.time.k_window):
        for b, q in enumerate(slat.space.k_window):
            u = relfield.plane_wave(slat, int(k), int(q)).ravel()
            u = u / np.linalg.norm(u)
            eig = max(eig, float(np.linalg.norm(J @ u - D[a, b] * u)))
    return CheckResult("relfield/action", {"action": act, "on_shell": on, "eigen": eig},
                       {"action": 1e-10, "on_shell": 1e-10, "eigen": 1e-12},
                       metadata={"n_t": slat.n_t, "n_x": slat.n_x, "m0": m0,
                                 "shell_dimension": shell.dimension})


# --- shipped defaults ------------------------------------------------------

_QUARTER = {"n_sites": 4, "dt": 1.0}


def _defaults():
    add_default({"check": "lattice/dft", "name": "lattice/dft/N8", "lattice": {"n_sites": 8, "dt": 0.5}})
    for N in (2, 4, 8, 16):
        for M in (1, 2):
            idx = [1, -1][:M] if N > 2 else [1, 0][:M]
            add_default({"check": "diag/exponentiated", "name": f"diag/exponentiated/onebody-N{N}-M{M}",
                         "lattice": {"n_sites": N, "dt": 1.0},
                         "theory": {"type": "oscillator", "frequency_index": idx, "n_modes": M}})
    add_default({"check": "diag/exponentiated", "name": "diag/exponentiated/fermi-N4",
                 "lattice": _QUARTER, "theory": {"type": "oscillator", "frequency_index": 1},
                 "engine": {"kind": "fock-fermi"}})
    add_default({"check": "diag/exponentiated", "name": "diag/exponentiated/bose-N4",
                 "lattice": _QUARTER, "theory": {"type": "oscillator", "frequency_index": 1},
                 "engine": {"kind": "fock-bose", "n_max": 3}})
    add_default({"check": "diag/generator", "name": "diag/generator/commensurate",
                 "lattice": {"n_sites": 8, "dt": 0.5},
                 "theory": {"type": "oscillator", "frequency_index": [1, 2], "n_modes": 2}})
    add_default({"check": "diag/generator", "name": "diag/generator/incommensurate",
                 "lattice": _QUARTER, "theory": {"type": "oscillator", "omega0": 1.0}})
    for kind, n_max in (("fock-fermi", 1), ("fock-bose", 6)):
        tag = kind.split("-")[1]
        base = {"lattice": _QUARTER, "theory": {"type": "oscillator", "frequency_index": 1},
                "engine": {"kind": kind, "n_max": n_max}, "seed": 2024}
        add_default({"check": "physical/kernel", "name": f"physical/kernel/{tag}", **base,
                     "options": {"n_states": 20}})
        add_default({"check": "physical/inner-product", "name": f"physical/inner-product/{tag}", **base})
        add_default({"check": "physical/foliation", "name": f"physical/foliation/{tag}",
                     **{**base, "engine": {"kind": kind, "n_max": min(n_max, 3)}}})
    add_default({"check": "physical/inner-product", "name": "physical/inner-product/fermi-M2",
                 "lattice": {"n_sites": 3, "dt": 1.0},
                 "theory": {"type": "oscillator", "frequency_index": [1, -1], "n_modes": 2},
                 "engine": {"kind": "fock-fermi"}, "seed": 11})
    for kind, n_max in (("fock-fermi", 1), ("fock-bose", 8)):
        tag = kind.split("-")[1]
        add_default({"check": "physical/propagator", "name": f"physical/propagator/{tag}",
                     "lattice": _QUARTER, "theory": {"type": "oscillator", "frequency_index": 1},
                     "engine": {"kind": kind, "n_max": n_max}, "seed": 7,
                     "options": {"delta_t": 1.0, "n_theories": 10}})
        add_default({"check": "physical/observable", "name": f"physical/observable/{tag}",
                     "lattice": _QUARTER, "theory": {"type": "oscillator", "frequency_index": 1},
                     "engine": {"kind": kind, "n_max": n_max}, "options": {"t": 1.0}})
    add_default({"check": "physical/entropy", "name": "physical/entropy/bose",
                 "lattice": _QUARTER, "theory": {"type": "oscillator", "frequency_index": 1},
                 "engine": {"kind": "fock-bose", "n_max": 8}, "seed": 5})
    add_default({"check": "physical/paw", "name": "physical/paw/M2",
                 "lattice": {"n_sites": 6, "dt": 0.5},
                 "theory": {"type": "oscillator", "frequency_index": [1, -2], "n_modes": 2},
                 "seed": 3})
    add_default({"check": "quadratic/translate", "name": "quadratic/translate/pairing",
                 "lattice": _QUARTER,
                 "theory": {"type": "quadratic", "omega0": 1.9634954084936207, "gamma": 1.1780972450961724},
                 "seed": 13, "options": {"delta_t": 1.0}})
    add_default({"check": "quadratic/propagate", "name": "quadratic/propagate/pairing",
                 "lattice": {"n_sites": 16, "dt": 0.25},
                 "theory": {"type": "quadratic", "omega0": [[1.0, 0.2], [0.2, 1.5]],
                            "gamma": [[0.1, 0.05], [0.05, 0.2]], "n_modes": 2}})
    add_default({"check": "onebody/time-commutator", "name": "onebody/time-commutator/N64",
                 "lattice": {"n_sites": 64, "dt": 1.0}})
    add_default({"check": "symmetry/conjugation", "name": "symmetry/conjugation/M2",
                 "lattice": {"n_sites": 64, "dt": 0.125}, "theory": {"type": "null", "n_modes": 2},
                 "seed": 17})
    add_default({"check": "fock/fermi-exactness", "name": "fock/fermi-exactness/N4M2",
                 "lattice": _QUARTER, "theory": {"type": "oscillator", "frequency_index": [1, 0],
                                                  "n_modes": 2}})
    add_default({"check": "fock/coherent", "name": "fock/coherent/nmax8",
                 "engine": {"kind": "fock-bose", "n_max": 8}})
    add_default({"check": "relfield/action", "name": "relfield/action/8x8",
                 "lattice": {"n_sites": 8, "dt": 1.0}, "theory": {"type": "rel-scalar", "m0": 0.0, "n_x": 8},
                 "seed": 99})
    add_default({"check": "relfield/action", "name": "relfield/action/massive",
                 "lattice": {"n_sites": 8, "dt": 1.0},
                 "theory": {"type": "rel-scalar", "m0": 1.5707963267948966, "n_x": 8}, "seed": 100})


_defaults()
