"""Command-line front end.

Every command writes one JSON document (stdout, or ``--out`` written
atomically). Exit codes: 0 success, 2 a check failed, 3 a budget ran out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass

from . import __version__
from .arith import (
    derive_plan,
    gen_pair_sequence,
    gen_triple_sequence,
    prime_factors,
    sequence_to_dict,
    verify_pair_congruences,
    verify_triple_sequence,
)
from .errors import AnisoforgeError, AuditFailed, BudgetExceeded, CertificationFailed
from .forms import (
    BlockFormSpec,
    HomogeneousForm,
    audit_precision,
    build_f,
    build_g,
    essential_variable_count,
    make_spec,
    norm_minus_scaled_power,
)
from .tower import make_unramified
from .verify import (
    SCHEMA_VERSION,
    build_certificate,
    chevalley_warning_check,
    enumerate_forms,
    goldbach_window_check,
    random_evaluation_audit,
)

EXIT_OK, EXIT_FAILED, EXIT_BUDGET = 0, 2, 3


@dataclass(frozen=True)
class RunConfig:
    command: str
    n_max: int | None = None
    p: int = 5
    precision: int | None = None
    budget: int | None = None
    trials: int = 1000
    seed: int = 0
    out: str | None = None


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_output(obj, out: str | None) -> None:
    text = dump_json(obj)
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".anisoforge-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _generate(kind: str, n: int, budget=None):
    return gen_pair_sequence(n, budget) if kind == "pair" else gen_triple_sequence(n, budget)


def form_artifact(spec: BlockFormSpec, expand: bool = False) -> dict:
    g = build_g(spec)
    f = build_f(spec, g)
    form = {
        "kind": "factored",
        "factors": [{"ring": r.to_dict(), "xi": xi.to_list()}
                    for r, xi in zip(spec.rings, spec.generators)],
        "blocks": str(f.blocks),
        "k": f.k,
        "pi": spec.pi.to_dict(),
    }
    out = {
        "schema": SCHEMA_VERSION,
        "artifact": "block-form",
        "degree": f.degree,
        "num_vars": f.num_vars,
        "essential_variables": essential_variable_count(spec),
        "norm_factor_degrees": list(spec.degrees),
        "spec": spec.to_dict(),
        "form": form,
    }
    if expand:
        out["expanded"] = f.expand().to_dict()
    return out


def load_spec(path: str) -> BlockFormSpec:
    with open(path) as fh:
        data = json.load(fh)
    return BlockFormSpec.from_dict(data["spec"])


# ---------------------------------------------------------------- commands


def cmd_seq(cfg: RunConfig, kind: str) -> int:
    seq = _generate(kind, cfg.n_max, cfg.budget)
    report = verify_pair_congruences(seq) if kind == "pair" else verify_triple_sequence(seq)
    plan = derive_plan(seq)
    out = {"schema": SCHEMA_VERSION, **sequence_to_dict(seq, plan), "checks": report.to_dict()}
    write_output(out, cfg.out)
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_build(cfg: RunConfig, kind: str, ram: int, expand: bool) -> int:
    seq = _generate(kind, cfg.n_max, cfg.budget)
    spec = make_spec(seq, cfg.n_max, p=cfg.p, N=cfg.precision, ram=ram)
    write_output(form_artifact(spec, expand), cfg.out)
    return EXIT_OK


def cmd_certify(cfg: RunConfig, artifact: str) -> int:
    try:
        spec = load_spec(artifact)
    except (ValueError, KeyError) as exc:
        write_output({
            "schema": SCHEMA_VERSION,
            "artifact": "anisotropy-certificate",
            "valid": False,
            "failed_clauses": ["structure_check"],
            "error": str(exc),
        }, cfg.out)
        return EXIT_FAILED
    cert = build_certificate(spec, cfg.budget)
    write_output(cert.to_dict(), cfg.out)
    return EXIT_OK if cert.valid else EXIT_FAILED


def cmd_audit(cfg: RunConfig, kind: str, artifact: str | None, m_cap: int) -> int:
    if artifact:
        spec = load_spec(artifact)
    else:
        seq = _generate(kind, cfg.n_max, cfg.budget)
        spec = make_spec(seq, cfg.n_max, p=cfg.p, N=audit_precision(seq[-1].p, m_cap))
    try:
        report = random_evaluation_audit(spec, cfg.trials, cfg.seed, m_cap, cfg.precision)
    except AuditFailed as exc:
        write_output(exc.report, cfg.out)
        return EXIT_FAILED
    write_output(report, cfg.out)
    return EXIT_OK


def named_form(name: str, p: int) -> HomogeneousForm:
    """Forms addressable from the command line."""
    if name == "demo3var":
        return HomogeneousForm(3, 2, p, 1, {(2, 0, 0): 1, (1, 1, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1})
    if name.startswith("nmsp"):
        # nmsp or nmsp<n>: norm form of the degree-n ring minus X_(n+1)^n
        n = int(name[4:] or 2)
        return norm_minus_scaled_power(make_unramified(p, n, 1), 1)
    if os.path.exists(name):
        with open(name) as fh:
            return HomogeneousForm.from_dict(json.load(fh)).residue()
    raise ValueError(f"unknown form {name!r}")


def _split_prime_power(q: int) -> tuple[int, int]:
    factors = prime_factors(q)
    if len(factors) != 1:
        raise ValueError(f"{q} is not a prime power")
    p, e = factors[0], 0
    while q > 1:
        q //= p
        e += 1
    return p, e


def cmd_cw(cfg: RunConfig, q: int, form_name: str | None, sweep: str | None) -> int:
    p, e = _split_prime_power(q)
    if sweep:
        degree, num_vars = (int(x) for x in sweep.split(":"))
        found = total = 0
        for form in enumerate_forms(p, degree, num_vars):
            total += 1
            chevalley_warning_check(form, e, cfg.budget)
            found += 1
        out = {"schema": SCHEMA_VERSION, "artifact": "chevalley-warning-sweep", "q": q,
               "degree": degree, "num_vars": num_vars, "forms": total, "zeros_found": found}
    else:
        form = named_form(form_name or "demo3var", p)
        witness = chevalley_warning_check(form, e, cfg.budget)
        out = {"schema": SCHEMA_VERSION, "artifact": "chevalley-warning", "q": q,
               "form": form.to_dict(), "witness": list(witness)}
    write_output(out, cfg.out)
    return EXIT_OK


def cmd_goldbach(cfg: RunConfig, exclude: str, window: str) -> int:
    excluded = [int(x) for x in exclude.split(",") if x.strip()]
    lo, hi = (int(x) for x in window.split(":"))
    write_output(goldbach_window_check(excluded, lo, hi, cfg.budget), cfg.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=_positive, help="search/scan cap (default 10^7 or $ANISOFORGE_BUDGET)")
    common.add_argument("--out", help="write JSON here instead of stdout")

    parser = argparse.ArgumentParser(prog="anisoforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("seq", parents=[common], help="generate a prime sequence and its plan")
    s.add_argument("kind", choices=["pair", "triple"])
    s.add_argument("--n", type=_positive, required=True)

    b = sub.add_parser("build", parents=[common], help="build the block form for entry n")
    b.add_argument("kind", choices=["pair", "triple"])
    b.add_argument("--n", type=_positive, required=True)
    b.add_argument("--p", type=_positive, default=5, help="base prime")
    b.add_argument("--precision", type=_positive)
    b.add_argument("--ram", type=_positive, default=1, help="ramification index D of the stage")
    b.add_argument("--expand", action="store_true", help="also emit the expanded monomials")

    c = sub.add_parser("certify", parents=[common], help="certify a block-form artifact")
    c.add_argument("artifact")

    a = sub.add_parser("audit", parents=[common], help="random valuation audit")
    a.add_argument("kind", nargs="?", choices=["pair", "triple"], default="pair")
    a.add_argument("--artifact")
    a.add_argument("--n", type=_positive, default=1)
    a.add_argument("--p", type=_positive, default=5)
    a.add_argument("--precision", type=_positive)
    a.add_argument("--trials", type=_positive, default=1000)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--mcap", type=int, default=3, help="largest sampled coordinate valuation")

    w = sub.add_parser("cw", parents=[common], help="Chevalley-Warning zero search over F_q")
    w.add_argument("--q", type=_positive, required=True)
    w.add_argument("--form", help="demo3var, nmsp<n>, or a path to an expanded form JSON")
    w.add_argument("--sweep", metavar="DEGREE:VARS", help="check every nonzero form of this shape")

    g = sub.add_parser("goldbach", parents=[common], help="three-prime decompositions over a window")
    g.add_argument("--exclude", default="")
    g.add_argument("--window", required=True, metavar="LO:HI")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(
        command=args.command,
        n_max=getattr(args, "n", None),
        p=getattr(args, "p", 5),
        precision=getattr(args, "precision", None),
        budget=args.budget,
        trials=getattr(args, "trials", 1000),
        seed=getattr(args, "seed", 0),
        out=args.out,
    )
    try:
        if args.command == "seq":
            return cmd_seq(cfg, args.kind)
        if args.command == "build":
            return cmd_build(cfg, args.kind, args.ram, args.expand)
        if args.command == "certify":
            return cmd_certify(cfg, args.artifact)
        if args.command == "audit":
            return cmd_audit(cfg, args.kind, args.artifact, args.mcap)
        if args.command == "cw":
            return cmd_cw(cfg, args.q, args.form, args.sweep)
        if args.command == "goldbach":
            return cmd_goldbach(cfg, args.exclude, args.window)
    except BudgetExceeded as exc:
        print(f"anisoforge: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except CertificationFailed as exc:
        print(f"anisoforge: certification failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except AnisoforgeError as exc:
        print(f"anisoforge: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except ValueError as exc:
        # malformed flag values (window, q, form name) are usage errors
        parser.error(str(exc))
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
