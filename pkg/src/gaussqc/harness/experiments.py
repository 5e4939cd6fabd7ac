"""Experiment definitions: per-trial work, aggregation and acceptance rules.

Each experiment supplies ``prepare`` (shared immutable context, built once
by the coordinator), ``trial`` (a pure function of context, trial index and
derived seed returning flat metrics) and ``summarize`` (theory values and
acceptance flags from the pooled trial records).
"""

import copy
import math

import numpy as np

from .. import qit
from ..channels import Ensemble, StinespringIsometry, apply_channel, channel_from_spec
from ..codes import build_random_code, code_diagnostics, code_from_basis, measured_parameters
from ..decoding import (
    OneShotParams,
    bounds_from_lambda,
    classical_error,
    helstrom_error,
    information_audit,
    joint_state,
    output_states,
    packing_bound,
    pgm_error,
    pgm_povm,
)
from ..errors import ConfigError
from ..gaussian import TailExperiment
from ..rng import derive_seed
from ..stats import wilson_upper
from ..typicality import iid_reduction, typicality_report

DUALITY_TOL = 1e-9
SLACK_TOL = 1e-8


def input_state(channel_spec):
    if channel_spec.input == "maximally_mixed":
        return np.eye(channel_spec.d, dtype=complex) / channel_spec.d
    return np.diag(np.asarray(channel_spec.input, dtype=float)).astype(complex)


def recipe_N(coherent, n, delta):
    return max(2, math.floor(2.0 ** (n * coherent - 3 * n * delta)))


# -- concentration ----------------------------------------------------------

class Concentration:
    name = "concentration"

    def stream_label(self, config):
        return f"tail:{config.params['bound']}"

    def prepare(self, config):
        p = config.params
        params = {"D": p["D"], "epsilon": p["epsilon"], "K": p["K"]}
        if p["r"] is not None:
            params["r"] = p["r"]
        if p["rank"] is not None:
            params["rank"] = p["rank"]
        try:
            return TailExperiment(p["bound"], params)
        except ValueError as exc:
            raise ConfigError("params", str(exc)) from exc

    def trial(self, ctx, index, rng, seed=None):
        stat = float(ctx.statistic(rng))
        return {"statistic": stat, "event": bool(ctx.event(stat))}

    def summarize(self, config, records, aggregates):
        ctx = self.prepare(config)
        ev = aggregates.get("event", {"successes": 0, "count": 0})
        n = ev["count"]
        upper = wilson_upper(ev["successes"], n) if n else 1.0
        theory = {
            "bound_name": ctx.bound_name,
            "theoretical": ctx.theoretical,
            "vacuous": ctx.theoretical >= 1.0,
        }
        return theory, {"tail_dominated": bool(ctx.theoretical >= 1.0 or upper <= ctx.theoretical)}


# -- code runs --------------------------------------------------------------

class CodeContext:
    def __init__(self, V, rho_tilde, N, eta, info):
        self.V = V
        self.rho_tilde = rho_tilde
        self.N = N
        self.eta = eta
        self.info = info


def build_code_context(config, n):
    ch = config.channel
    V1 = channel_from_spec(ch.family, ch.d, ch.params)
    rho = input_state(ch)
    HB = qit.entropy(apply_channel(V1, rho))
    HE = qit.entropy(qit.partial_trace(V1.apply(rho), (V1.dim_b, V1.dim_e), [1]))
    info = {"n": n, "coherent_information": HB - HE}
    delta = config.code.delta
    if delta is not None:
        red = iid_reduction(V1, rho, n, delta)
        V, rho_tilde = red.channel, red.rho_tilde
        info.update(
            measured_epsilon=red.measured_epsilon,
            D_param=red.params["D_param"],
            Delta=red.params["Delta"],
            rank_PE=red.params["rank_PE"],
            recipe_N=red.recipe_N,
        )
    else:
        V = V1.tensor_power(n)
        rho_tilde = rho
        for _ in range(n - 1):
            rho_tilde = np.kron(rho_tilde, rho)
    if config.code.N is not None:
        N = config.code.N
    elif config.code.rate is not None:
        N = max(2, math.floor(2.0 ** (n * config.code.rate)))
    elif delta is not None:
        N = recipe_N(HB - HE, n, delta)
    else:
        raise ConfigError("code", "set code.N, code.rate or code.delta")
    if N > qit.rank(rho_tilde):
        raise ConfigError("code.N", f"N={N} exceeds the input rank {qit.rank(rho_tilde)}")
    info["N"] = N
    info["ambient_dim"] = rho_tilde.shape[0]
    return CodeContext(V, rho_tilde, N, config.code.eta, info)


def code_trial_metrics(ctx, rng, seed):
    code = build_random_code(ctx.rho_tilde, ctx.N, seed, generator=rng)
    V = ctx.V
    psi = joint_state(code, V)
    sig = output_states(V, code.phi)
    sig_hat = output_states(V, code.phi_hat)
    pe = pgm_error(sig)
    pe_hat = pgm_error(sig_hat)
    audit = information_audit(psi, code, V, measured_error=pe)
    # packing audit: PGM on the unnormalised gamma outputs
    sig_gamma = output_states(V, code.gamma)
    w = np.full(code.N, 1.0 / code.N)
    pe_gamma = classical_error(sig_gamma, pgm_povm(Ensemble(w, sig_gamma)))
    eps, eta = measured_parameters(code)
    m = {
        "decoupling_distance": audit.decoupling_distance,
        "H_R": audit.H_R,
        "I_RB": audit.I_RB,
        "I_RE": audit.I_RE,
        "chi_basis": audit.chi_basis,
        "chi_conjugate": audit.chi_conjugate,
        "duality_residual": audit.duality_residual,
        "pinsker_slack": audit.pinsker_slack,
        "uncertainty_slack": audit.uncertainty_slack,
        "fano_slack": audit.chi_basis - audit.fano_bound,
        "pgm_error_basis": pe,
        "pgm_error_conjugate": pe_hat,
        "pgm_error_gamma": pe_gamma,
        "measured_epsilon": eps,
        "measured_eta": eta,
    }
    if eps <= 1 / 3:
        diag = code_diagnostics(code, eps, eta)
        m["perturbation_avg"] = diag.perturbation_avg
        m["perturbation_bound"] = diag.bound_value
        m["perturbation_bound_holds"] = diag.bound_holds
    return m


def chain_acceptance(aggregates):
    def worst(name, key):
        a = aggregates.get(name)
        return None if a is None else a[key]

    flags = {}
    d = worst("duality_residual", "max")
    if d is not None:
        flags["duality"] = d <= DUALITY_TOL
    for name in ("uncertainty_slack", "pinsker_slack", "fano_slack"):
        v = worst(name, "min")
        if v is not None:
            flags[name.replace("_slack", "")] = v >= -SLACK_TOL
    pb = aggregates.get("perturbation_bound_holds")
    if pb is not None:
        flags["perturbation_bound"] = pb["successes"] == pb["count"]
    return flags


def lambda_report(N, epsilon, eta, divisor=6):
    eps = min(max(epsilon, 1e-300), 1.0)
    lam = OneShotParams(eps, eta, 1.0, 1.0, 1, N, divisor).lam
    out = bounds_from_lambda(lam, N) if N >= 2 else {"lambda": lam, "vacuous": True}
    out["label"] = "vacuous" if out["vacuous"] else "non-vacuous"
    return out


class CodeRun:
    name = "code-run"

    def stream_label(self, config):
        return self.name

    def prepare(self, config):
        return build_code_context(config, config.channel.n)

    def trial(self, ctx, index, rng, seed=None):
        return code_trial_metrics(ctx, rng, seed)

    def summarize(self, config, records, aggregates):
        ctx = self.prepare(config)
        theory = dict(ctx.info)
        eps = aggregates.get("measured_epsilon", {}).get("mean")
        eta = aggregates.get("measured_eta", {}).get("mean")
        if eps is not None:
            theory["oneshot"] = lambda_report(ctx.N, min(eps, 1 / 3), eta)
            theory["packing_bound"] = list(packing_bound(eps, eta))
        return theory, chain_acceptance(aggregates)


class IidSweep:
    name = "iid-sweep"

    def stream_label(self, config):
        return self.name

    def prepare(self, config):
        delta = config.code.delta if config.code.delta is not None else 0.15
        if config.code.delta is None:
            config = _with_delta(config, delta)
        return {n: build_code_context(config, n) for n in config.params["n_values"]}

    def trial(self, ctx, index, rng, seed=None):
        ns = sorted(ctx)
        n = ns[index % len(ns)]
        m = code_trial_metrics(ctx[n], rng, seed)
        m = {"n": n, **m}
        return m

    def summarize(self, config, records, aggregates):
        ctx = self.prepare(config)
        per_n = {}
        for n in sorted(ctx):
            rows = [r["metrics"] for r in records if r["status"] == "ok" and r["metrics"]["n"] == n]
            info = dict(ctx[n].info)
            if rows:
                info["median_decoupling_distance"] = float(np.median([r["decoupling_distance"] for r in rows]))
                info["max_pgm_error_basis"] = max(r["pgm_error_basis"] for r in rows)
                info["max_pgm_error_conjugate"] = max(r["pgm_error_conjugate"] for r in rows)
                info["trials"] = len(rows)
            eps = info.get("measured_epsilon", 1.0)
            info["oneshot"] = lambda_report(info["N"], min(max(eps, 1e-12), 1 / 3), config.code.eta)
            per_n[str(n)] = info
        flags = chain_acceptance(aggregates)
        meds = [per_n[str(n)].get("median_decoupling_distance") for n in sorted(ctx)]
        if all(m is not None for m in meds):
            flags["decoupling_non_increasing"] = all(b <= a for a, b in zip(meds, meds[1:]))
        top = per_n[str(max(ctx))]
        if "max_pgm_error_basis" in top:
            thr = config.params["pgm_threshold"]
            flags["pgm_error_at_largest_n"] = (
                top["max_pgm_error_basis"] <= thr and top["max_pgm_error_conjugate"] <= thr
            )
        return {"per_n": per_n}, flags


def _with_delta(config, delta):
    c = copy.deepcopy(config)
    c.code.delta = delta
    return c


# -- uncertainty relation on random instances -------------------------------

class Uncertainty:
    name = "uncertainty"

    def stream_label(self, config):
        return self.name

    def prepare(self, config):
        return dict(config.params)

    def trial(self, ctx, index, rng, seed=None):
        da = int(rng.integers(2, ctx["max_dim_a"] + 1))
        de = int(rng.integers(1, ctx["max_dim_e"] + 1))
        db = int(rng.integers(max(1, math.ceil(da / de)), ctx["max_dim_b"] + 1))
        N = int(rng.integers(2, min(ctx["max_N"], da) + 1))
        V = StinespringIsometry(qit.random_isometry(db * de, da, rng), da, db, de)
        kind = index % 3
        if kind == 0:
            code = build_random_code(np.eye(da) / da, N, seed, generator=rng)
        elif kind == 1:
            code = build_random_code(qit.random_density(da, rng), N, seed, generator=rng)
        else:
            # structured basis of a random subspace: eigenbasis of the
            # compressed clock observable
            sub = qit.random_isometry(da, N, rng)
            obs = sub.conj().T @ np.diag(np.arange(da)) @ sub
            _, u = np.linalg.eigh(obs)
            code = code_from_basis((sub @ u).T, seed=seed)
        psi = joint_state(code, V)
        audit = information_audit(psi, code, V)
        return {
            "dim_a": da,
            "dim_b": db,
            "dim_e": de,
            "N": N,
            "basis_kind": ("gaussian", "distorted", "structured")[kind],
            "chi_basis": audit.chi_basis,
            "chi_conjugate": audit.chi_conjugate,
            "I_RB": audit.I_RB,
            "uncertainty_slack": audit.uncertainty_slack,
            "duality_residual": audit.duality_residual,
            "pinsker_slack": audit.pinsker_slack,
            "fano_slack": audit.chi_basis - audit.fano_bound,
        }

    def summarize(self, config, records, aggregates):
        return {}, chain_acceptance(aggregates)


# -- PGM versus Helstrom ----------------------------------------------------

class PgmAudit:
    name = "pgm"

    def stream_label(self, config):
        return self.name

    def prepare(self, config):
        return list(config.params["dims"])

    def trial(self, ctx, index, rng, seed=None):
        d = ctx[index % len(ctx)]
        s0 = qit.random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        s1 = qit.random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        pe = pgm_error(np.array([s0, s1]))
        he = helstrom_error(s0, s1)
        v = qit.random_pure_state(d, rng)
        u = qit.random_unitary(d, rng)
        p0 = qit.ket_to_dm(v)
        p1 = qit.ket_to_dm(u @ v)
        pe_sym = pgm_error(np.array([p0, p1]))
        he_sym = helstrom_error(p0, p1)
        return {
            "dim": d,
            "pgm_error": pe,
            "helstrom_error": he,
            "pgm_minus_helstrom": pe - he,
            "symmetric_gap": abs(pe_sym - he_sym),
        }

    def summarize(self, config, records, aggregates):
        gap = aggregates.get("pgm_minus_helstrom")
        sym = aggregates.get("symmetric_gap")
        flags = {}
        if gap:
            flags["pgm_dominates_helstrom"] = gap["min"] >= -1e-10
        if sym:
            flags["symmetric_equality"] = sym["max"] <= 1e-9
        return {}, flags


# -- typicality -------------------------------------------------------------

class Typicality:
    name = "typicality"

    def stream_label(self, config):
        return self.name

    def prepare(self, config):
        return dict(config.params)

    def trial(self, ctx, index, rng, seed=None):
        n = ctx["n_values"][index]
        rep = typicality_report(np.asarray(ctx["spectrum"], dtype=float), n, ctx["delta"])
        return {
            "n": n,
            "subspace_dim": rep["subspace_dim"],
            "dimension_limit": rep["dimension_limit"],
            "dimension_bound_holds": rep["dimension_bound_holds"],
            "max_log_prob": rep["max_log_prob"],
            "operator_limit_log": rep["operator_limit_log"],
            "operator_bound_holds": rep["operator_bound_holds"],
            "truncation_weight": rep["truncation_weight"],
        }

    def summarize(self, config, records, aggregates):
        rows = sorted((r["metrics"] for r in records if r["status"] == "ok"), key=lambda m: m["n"])
        tw = [m["truncation_weight"] for m in rows]
        flags = {
            "dimension_bound": all(m["dimension_bound_holds"] for m in rows),
            "operator_bound": all(m["operator_bound_holds"] for m in rows),
            "truncation_strictly_decreasing": all(b < a for a, b in zip(tw, tw[1:])),
        }
        theory = {"truncation_weights": {str(m["n"]): m["truncation_weight"] for m in rows}}
        return theory, flags


REGISTRY = {
    e.name: e
    for e in (Concentration(), CodeRun(), IidSweep(), Uncertainty(), PgmAudit(), Typicality())
}


def trial_seed(config, index):
    return derive_seed(config.master_seed, REGISTRY[config.experiment].stream_label(config), index)
