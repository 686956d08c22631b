"""Command-line front end.

Exit codes: 0 success, 1 the answer is "no" (not majorized, conditions
violated, ...), 2 bad input.  Results go to stdout as JSON.

Formats
  probability vector   {"p": [...]}  (a bare list is accepted too)
  Gibbs spec           {"energies": [...], "beta": b}
  matrix               row-major nested list; stochastic matrices are
                       column-stochastic (columns sum to one)
  density matrix       nested list of [re, im] pairs, or a real nested list
  channel              {"kraus": [matrix, ...]}

Any file argument may also be given inline as a JSON literal.
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import catalysis, divergence, majorization, qdivergence, qmajorization, quantum, smoothing, thermo
from .prob import GibbsSpec, ValidationError, prob_vec


class CLIError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError("usage", message)


# --- input ---------------------------------------------------------------

def _load(arg):
    s = arg.strip()
    if s[:1] in "{[":
        text = s
    else:
        try:
            with open(arg, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise CLIError("io_error", f"cannot read {arg}: {exc.strerror}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CLIError("invalid_json", f"{arg}: {exc.msg}")


def _vec(arg, normalize=False):
    obj = _load(arg)
    if isinstance(obj, dict):
        if "p" not in obj:
            raise ValidationError("probability vector JSON needs a 'p' key")
        obj = obj["p"]
    return prob_vec(obj, normalize=normalize)


def _gibbs(arg):
    obj = _load(arg)
    if not isinstance(obj, dict) or "energies" not in obj or "beta" not in obj:
        raise ValidationError("Gibbs spec JSON needs 'energies' and 'beta'")
    return GibbsSpec(tuple(obj["energies"]), float(obj["beta"]))


def decode_matrix(obj):
    a = np.array(obj, dtype=float)
    if a.ndim == 3 and a.shape[-1] == 2:
        return a[..., 0] + 1j * a[..., 1]
    if a.ndim != 2:
        raise ValidationError("matrix must be a nested list (optionally of [re, im] pairs)")
    return a


def encode_matrix(M):
    M = np.asarray(M)
    if np.iscomplexobj(M):
        return [[[float(z.real), float(z.imag)] for z in row] for row in M]
    return [[float(x) for x in row] for row in M]


def _matrix(arg, key=None):
    obj = _load(arg)
    if isinstance(obj, dict):
        for k in ([key] if key else []) + ["rho", "H", "matrix", "T"]:
            if k in obj:
                obj = obj[k]
                break
        else:
            raise ValidationError("matrix JSON object has no recognised key")
    return decode_matrix(obj)


def _density(arg):
    return np.asarray(quantum.DensityMatrix(_matrix(arg, "rho")))


def _channel(arg):
    obj = _load(arg)
    ks = obj["kraus"] if isinstance(obj, dict) else obj
    return quantum.QuantumChannel([decode_matrix(k) for k in ks])


def _num(x):
    x = float(x)
    if x == float("inf"):
        return "inf"
    if x == float("-inf"):
        return "-inf"
    return x


# --- commands ------------------------------------------------------------

def cmd_majorize(a):
    p, q = _vec(a.p, a.normalize), _vec(a.q, a.normalize)
    k = majorization.violated_k(p, q)
    if k is not None or a.action == "check":
        return int(k is not None), {"majorizes": k is None, "violated_k": k}
    rep = majorization.witness_doubly_stochastic(p, q)
    terms = majorization.birkhoff_decompose(rep.matrix)
    return 0, {
        "majorizes": True,
        "T": encode_matrix(rep.matrix),
        "residual": rep.residual_p,
        "birkhoff": [{"perm": [int(i) for i in s], "weight": w} for s, w in terms],
    }


def cmd_dmajorize(a):
    vs = [_vec(x, a.normalize) for x in (a.p, a.q, a.ptarget, a.qtarget)]
    ok = majorization.d_majorizes((vs[0], vs[1]), (vs[2], vs[3]))
    if not ok or a.action == "check":
        return int(not ok), {"d_majorizes": bool(ok)}
    rep = majorization.witness_d_stochastic(*vs)
    return 0, {
        "d_majorizes": True,
        "T": encode_matrix(rep.matrix),
        "residual_p": rep.residual_p,
        "residual_q": rep.residual_q,
        "method": rep.method,
    }


def cmd_lorenz(a):
    p = _vec(a.p, a.normalize)
    if a.q:
        curve = majorization.lorenz_relative(p, _vec(a.q, a.normalize))
    else:
        curve = majorization.lorenz(p)
    pts = [[float(x), float(y)] for x, y in curve.points]
    if a.csv:
        with open(a.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y"])
            w.writerows(pts)
    return 0, {"kind": curve.kind, "points": pts}


def cmd_div(a):
    p, q = _vec(a.p, a.normalize), _vec(a.q, a.normalize)
    if a.f:
        f = divergence.named_function(a.f)
        return 0, {"f": f.label, "value": _num(divergence.f_divergence(p, q, f))}
    return 0, {"alpha": _num(a.alpha), "value": _num(divergence.renyi_divergence(p, q, a.alpha))}


def cmd_qdiv(a):
    rho, sigma = _density(a.rho), _density(a.sigma)
    kind, _, arg = a.kind.partition(":")
    if kind == "kl":
        v = qdivergence.quantum_kl(rho, sigma)
    elif kind == "r0":
        v = qdivergence.q_renyi_0(rho, sigma)
    elif kind == "rinf":
        v = qdivergence.q_renyi_inf(rho, sigma)
    elif kind in ("petz", "sandwich") and arg:
        fn = qdivergence.petz_renyi if kind == "petz" else qdivergence.sandwiched_renyi
        v = fn(rho, sigma, float(arg))
    else:
        raise ValidationError(f"unknown divergence kind {a.kind!r}")
    return 0, {"kind": a.kind, "value": _num(v)}


def _verdict(v):
    return {
        "satisfied": v.satisfied,
        "failing_alpha": None if v.failing_alpha is None else _num(v.failing_alpha),
        "caveat": v.caveat,
    }


def cmd_catalysis(a):
    p, pt = _vec(a.p, a.normalize), _vec(a.ptarget, a.normalize)
    if a.mode == "trump":
        v = catalysis.trump_exact_conditions(p, pt)
    elif a.mode == "dtrump":
        if not (a.q and a.qtarget):
            raise ValidationError("dtrump needs --q and --qtarget")
        v = catalysis.d_trump_conditions(p, _vec(a.q, a.normalize), pt, _vec(a.qtarget, a.normalize))
    else:
        v = catalysis.correlated_catalysis_conditions(p, pt)
    out = _verdict(v)
    ok = v.satisfied
    if a.catalyst:
        r = _vec(a.catalyst, a.normalize)
        out["catalyst_verified"] = bool(catalysis.verify_catalyst(p, pt, r))
        ok = out["catalyst_verified"]
    return int(not ok), out


def _protocol_from_json(obj):
    try:
        beta = float(obj["beta"])
        E0 = [float(x) for x in obj["energies"]]
        p0 = prob_vec(obj["p"])
        raw = obj["steps"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"protocol JSON is missing a field: {exc}")
    steps = []
    for s in raw:
        if "quench" in s:
            steps.append(thermo.Quench(tuple(float(x) for x in s["quench"])))
        elif "relax" in s:
            T = s["relax"]
            steps.append(thermo.Relax(None if T is None else np.array(T, dtype=float)))
        else:
            raise ValidationError(f"unknown step {s!r}")
    return thermo.Protocol(steps, beta), p0, E0


def cmd_thermo(a):
    if a.action == "protocol":
        if not a.spec:
            raise ValidationError("thermo protocol needs --spec")
        proto, p0, E0 = _protocol_from_json(_load(a.spec))
        rep = thermo.simulate_protocol(proto, p0, E0)
        if a.csv:
            with open(a.csv, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["step"] + [f"p{i}" for i in range(len(p0))])
                for i, row in enumerate(rep.trajectory):
                    w.writerow([i] + [float(x) for x in row])
        return 0, {
            "work": rep.work,
            "heat": rep.heat,
            "delta_S1": rep.delta_S1,
            "sigma": rep.sigma,
            "work_variance": rep.work_variance,
        }
    if not (a.case and a.gibbs):
        raise ValidationError("thermo workbound needs --case and --gibbs")
    g = _gibbs(a.gibbs)
    gt = _gibbs(a.gibbs_target) if a.gibbs_target else None
    p = _vec(a.p, a.normalize) if a.p else g.state
    return 0, {"case": a.case, "bound": _num(thermo.work_bound(a.case, p, g, gt))}


def cmd_qwork(a):
    rho, rhoT = _density(a.rho), _density(a.rhoT)
    sS = quantum.QGibbsSpec(_matrix(a.H, "H"), a.beta)
    sT = quantum.QGibbsSpec(_matrix(a.HT, "H"), a.beta)
    v = qmajorization.single_shot_work_verdict(rho, rhoT, sS, sT, a.w)
    out = {
        "necessary_alpha0": v.necessary_alpha0,
        "necessary_alpha1": v.necessary_alpha1,
        "necessary_alphainf": v.necessary_alphainf,
        "sufficient": v.sufficient,
    }
    return int(not v.necessary), out


def _classical_or_quantum(a):
    if a.p and a.q:
        return "classical", _vec(a.p, a.normalize), _vec(a.q, a.normalize)
    if a.rho and a.sigma:
        return "quantum", _density(a.rho), _density(a.sigma)
    raise ValidationError("give --p/--q or --rho/--sigma")


def cmd_sh(a):
    kind, x, y = _classical_or_quantum(a)
    if kind == "classical":
        return 0, {"value": _num(smoothing.sh_classical(x, y, a.eta))}
    v, cert = smoothing.sh_quantum(x, y, a.eta)
    return 0, {"value": _num(v), "mu": cert.mu, "primal": cert.primal, "dual": cert.dual, "gap": cert.gap}


def cmd_smooth(a):
    kind, x, y = _classical_or_quantum(a)
    if kind == "classical":
        if a.which == "r0":
            v, exact = smoothing.smooth_r0_classical(x, y, a.eps, return_exact=True)
        else:
            v, exact = smoothing.smooth_rinf_classical(x, y, a.eps), True
        return 0, {"which": a.which, "value": _num(v), "exact": exact}
    b = smoothing.smooth_quantum_bounds(x, y, a.eps)
    lo, hi = (b.r0_lo, b.r0_hi) if a.which == "r0" else (b.rinf_lo, b.rinf_hi)
    return 0, {"which": a.which, "lower": _num(lo), "upper": _num(hi)}


def cmd_stein(a):
    kind, x, y = _classical_or_quantum(a)
    if kind == "classical":
        sw = smoothing.stein_sweep_classical(x, y, a.eta, a.n_max)
    else:
        sw = smoothing.stein_sweep_quantum(x, y, a.eta, a.n_max)
    if a.csv:
        with open(a.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "rate", "target"])
            w.writerows(sw.rows())
    return 0, {
        "eta": sw.eta,
        "n_max": sw.n_values[-1],
        "rate": sw.rates[-1],
        "target": sw.target,
        "gap": abs(sw.rates[-1] - sw.target),
        "converged": sw.converged,
    }


def _rng(a):
    if a.seed is None:
        raise CLIError("missing_seed", "randomized commands require --seed")
    return np.random.default_rng(a.seed)


def cmd_witness(a):
    if a.random:
        rng = _rng(a)
        rho = quantum.random_density(rng, a.dim)
        rhoT = quantum.random_unital_channel(rng, a.dim)(rho)
    else:
        if not (a.rho and a.rhoT):
            raise ValidationError("witness needs --rho and --rhoT (or --random with --seed)")
        rho, rhoT = _density(a.rho), _density(a.rhoT)
    if not qmajorization.q_majorizes(rho, rhoT):
        k = majorization.violated_k(quantum.eigh_desc(rho)[0], quantum.eigh_desc(rhoT)[0])
        return 1, {"majorizes": False, "violated_k": k}
    E = qmajorization.q_majorization_witness(rho, rhoT)
    return 0, {
        "majorizes": True,
        "kraus": [encode_matrix(K) for K in E.kraus],
        "residual": float(np.abs(E(rho) - rhoT).max()),
        "cptp": quantum.is_cptp(E),
        "unital": quantum.is_unital(E),
    }


def cmd_channel_check(a):
    spec = None
    if a.H:
        spec = quantum.QGibbsSpec(_matrix(a.H, "H"), a.beta)
    if a.random:
        rng = _rng(a)
        if a.random == "gp":
            if spec is None:
                raise ValidationError("--random gp needs --H and --beta")
            E = quantum.random_gibbs_preserving_channel(rng, spec)
        elif a.random == "unital":
            E = quantum.random_unital_channel(rng, a.dim)
        else:
            E = quantum.random_channel(rng, a.dim)
    else:
        if not a.kraus:
            raise ValidationError("channel-check needs --kraus (or --random with --seed)")
        E = _channel(a.kraus)
    preds = quantum.predicates(E, spec)
    out = {k: bool(v) for k, v in preds.items()}
    if a.random:
        out["kraus"] = [encode_matrix(K) for K in E.kraus]
    return int(not out.get("cptp", True)), out


# --- parser --------------------------------------------------------------

def build_parser():
    top = _Parser(prog="majthermo", description="Majorization and thermodynamics toolkit.")
    top.add_argument("--normalize", action="store_true", help="renormalize probability vectors on input")
    top.add_argument("--out", help="also write the JSON result to this path")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("majorize", help="ordinary majorization: does p majorize q?")
    m.add_argument("action", choices=["check", "witness"])
    m.add_argument("--p", required=True)
    m.add_argument("--q", required=True)
    m.set_defaults(fn=cmd_majorize)

    m = sub.add_parser("dmajorize", help="(p, q) d-majorizes (ptarget, qtarget)?")
    m.add_argument("action", choices=["check", "witness"])
    for f in ("--p", "--q", "--ptarget", "--qtarget"):
        m.add_argument(f, required=True)
    m.set_defaults(fn=cmd_dmajorize)

    m = sub.add_parser("lorenz", help="Lorenz curve breakpoints (relative when --q is given)")
    m.add_argument("--p", required=True)
    m.add_argument("--q")
    m.add_argument("--csv")
    m.set_defaults(fn=cmd_lorenz)

    m = sub.add_parser("div", help="Renyi divergence, or an f-divergence with --f")
    m.add_argument("--p", required=True)
    m.add_argument("--q", required=True)
    m.add_argument("--alpha", type=float, default=1.0)
    m.add_argument("--f", help="klf | tv | hellinger | chi2 | alpha:A")
    m.set_defaults(fn=cmd_div)

    m = sub.add_parser("qdiv", help="quantum divergences")
    m.add_argument("--kind", required=True, help="kl | r0 | rinf | petz:A | sandwich:A")
    m.add_argument("--rho", required=True)
    m.add_argument("--sigma", required=True)
    m.set_defaults(fn=cmd_qdiv)

    m = sub.add_parser("catalysis", help="catalytic convertibility conditions")
    m.add_argument("mode", choices=["trump", "dtrump", "correlated"])
    m.add_argument("--p", required=True)
    m.add_argument("--ptarget", required=True)
    m.add_argument("--q")
    m.add_argument("--qtarget")
    m.add_argument("--catalyst", help="verify this catalyst exactly by partial sums")
    m.set_defaults(fn=cmd_catalysis)

    m = sub.add_parser("thermo", help="protocol simulation and work bounds")
    m.add_argument("action", choices=["protocol", "workbound"])
    m.add_argument("--spec", help="protocol JSON: beta, energies, p, steps")
    m.add_argument("--csv", help="trajectory dump")
    m.add_argument("--case", choices=["formation", "extraction", "equilibrium"])
    m.add_argument("--gibbs")
    m.add_argument("--gibbs-target")
    m.add_argument("--p")
    m.set_defaults(fn=cmd_thermo)

    m = sub.add_parser("qwork", help="single-shot work verdict with clock and storage")
    m.add_argument("action", choices=["verdict"])
    for f in ("--rho", "--rhoT", "--H", "--HT"):
        m.add_argument(f, required=True)
    m.add_argument("--beta", type=_positive, required=True)
    m.add_argument("--w", type=float, required=True)
    m.set_defaults(fn=cmd_qwork)

    for name, helptext in (("sh", "hypothesis-testing divergence"), ("smooth", "smooth divergences"),
                           ("stein", "Stein sweep")):
        m = sub.add_parser(name, help=helptext)
        m.add_argument("--p")
        m.add_argument("--q")
        m.add_argument("--rho")
        m.add_argument("--sigma")
        if name == "smooth":
            m.add_argument("--eps", type=_unit_closed_open, required=True)
            m.add_argument("--which", choices=["r0", "rinf"], required=True)
            m.set_defaults(fn=cmd_smooth)
        else:
            m.add_argument("--eta", type=_unit_open, required=True)
        if name == "sh":
            m.set_defaults(fn=cmd_sh)
        if name == "stein":
            m.add_argument("--n-max", type=_positive_int, required=True)
            m.add_argument("--csv")
            m.set_defaults(fn=cmd_stein)

    m = sub.add_parser("witness", help="unital channel realizing a quantum majorization")
    m.add_argument("--rho")
    m.add_argument("--rhoT")
    m.add_argument("--random", action="store_true", help="draw a random majorizing pair")
    m.add_argument("--dim", type=_positive_int, default=2)
    m.add_argument("--seed", type=int)
    m.set_defaults(fn=cmd_witness)

    m = sub.add_parser("channel-check", help="CPTP / unital / Gibbs-preserving predicates")
    m.add_argument("--kraus")
    m.add_argument("--H")
    m.add_argument("--beta", type=_positive, default=1.0)
    m.add_argument("--random", choices=["cptp", "unital", "gp"])
    m.add_argument("--dim", type=_positive_int, default=2)
    m.add_argument("--seed", type=int)
    m.set_defaults(fn=cmd_channel_check)
    return top


def _positive(s):
    x = float(s)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return x


def _positive_int(s):
    x = int(s)
    if x < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return x


def _unit_open(s):
    x = float(s)
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError("must lie in (0, 1)")
    return x


def _unit_closed_open(s):
    x = float(s)
    if not 0 <= x < 1:
        raise argparse.ArgumentTypeError("must lie in [0, 1)")
    return x


def _emit(obj, out, stream):
    text = json.dumps(obj)
    print(text, file=stream)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def run(argv=None, stdout=None):
    """Parse ``argv``, print the JSON result and return the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    try:
        args = build_parser().parse_args(argv)
        code, result = args.fn(args)
    except CLIError as exc:
        _emit({"error": {"code": exc.code, "message": str(exc)}}, None, stdout)
        return 2
    except ValidationError as exc:
        _emit({"error": {"code": exc.code, "message": str(exc)}}, None, stdout)
        return 2
    except majorization.NotMajorized as exc:
        _emit({"error": {"code": "not_majorized", "message": str(exc)}}, None, stdout)
        return 1
    _emit(result, args.out, stdout)
    return code


def main():
    sys.exit(run())
