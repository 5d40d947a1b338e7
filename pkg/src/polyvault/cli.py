"""Command-line harness: experiments, record tooling, bound tables.

Exit codes: 0 success, 1 the requested operation ran but did not succeed
(failed unlock, failed attack), 2 invalid configuration or arguments,
3 I/O problems.  Experiment subcommands write CSV (stdout or --out) and
can additionally render a figure next to it with --figure.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import attack, bounds, experiments, gf2m, vault
from .experiments import ConfigError, ExperimentConfig

EXIT_OK = 0
EXIT_OPERATION_FAILED = 1
EXIT_VALIDATION = 2
EXIT_IO = 3


def _default_threads() -> int:
    raw = os.environ.get("POLYVAULT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_experiment_args(sub, with_full_extras=False):
    sub.add_argument("--q-bits", type=int, required=True, help="field size exponent m, q = 2^m")
    sub.add_argument("--t", type=int, required=True, help="first feature-set size")
    sub.add_argument("--s", type=int, default=None, help="second feature-set size (default: t)")
    sub.add_argument("--k", type=int, required=True, help="secret length; degree bound on the secret polynomial")
    sub.add_argument("--omega", type=str, required=True, help='comma-separated overlaps or "all"')
    sub.add_argument("--trials", type=int, required=True, help="Monte-Carlo trials per overlap value")
    sub.add_argument("--seed", type=int, default=1, help="master seed; fixes all randomness")
    sub.add_argument("--threads", type=int, default=_default_threads(),
                     help="worker threads (default: POLYVAULT_THREADS or 1)")
    sub.add_argument("--variant", choices=sorted(experiments.VARIANT_ALIASES),
                     default="prob", help="record variant to enroll")
    sub.add_argument("--blend-size", type=int, default=0, help="blended variant: blending-set size")
    sub.add_argument("--ext-factor", type=int, default=2, help="blended variant: extension degree over the base field")
    sub.add_argument("--timing", action="store_true",
                     help="measure attack wall time (makes CSV bytes run-dependent)")
    sub.add_argument("--out", type=str, default=None, help="CSV output path (default: stdout)")
    sub.add_argument("--figure", type=str, default=None, help="also render a figure to this path")
    if with_full_extras:
        sub.add_argument("--budget", type=int, default=0,
                         help="run the budgeted retry driver with this many attempts per trial")


def _config_from_args(args) -> ExperimentConfig:
    s = args.s if args.s is not None else args.t
    return ExperimentConfig(
        m_bits=args.q_bits,
        t=args.t,
        s=s,
        k=args.k,
        omega_list=experiments.parse_omega_list(args.omega, s),
        trials=args.trials,
        seed=args.seed,
        threads=args.threads,
        variant=experiments.VARIANT_ALIASES[args.variant],
        blend_size=args.blend_size,
        ext_factor=args.ext_factor,
        timing=args.timing,
        budget=getattr(args, "budget", 0),
    )


def _write_text(path, text) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def _emit(args, csv_text) -> int:
    try:
        _write_text(args.out, csv_text)
    except OSError as exc:
        print("cannot write %s: %s" % (args.out, exc), file=sys.stderr)
        return EXIT_IO
    if args.figure:
        from . import plotting

        try:
            plotting.render_success_rates(csv_text, args.figure)
        except OSError as exc:
            print("cannot write %s: %s" % (args.figure, exc), file=sys.stderr)
            return EXIT_IO
    return EXIT_OK


def cmd_experiment_partial(args) -> int:
    cfg = _config_from_args(args)
    return _emit(args, experiments.partial_experiment(cfg))


def cmd_experiment_full(args) -> int:
    cfg = _config_from_args(args)
    return _emit(args, experiments.full_experiment(cfg))


def _load_features(gf, path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise IOError("cannot read %s: %s" % (path, exc)) from exc
    except json.JSONDecodeError as exc:
        raise vault.VaultError("bad feature file %s: %s" % (path, exc)) from exc
    if not isinstance(data, list):
        raise vault.VaultError("feature file must hold a JSON array")
    out = []
    for item in data:
        if isinstance(item, str):
            out.append(gf.from_hex(item))
        elif isinstance(item, int):
            gf._check(item)
            out.append(item)
        else:
            raise vault.VaultError("feature entries must be ints or hex strings")
    return out


def _load_record(path) -> vault.VaultRecord:
    try:
        with open(path) as fh:
            return vault.deserialize(fh.read())
    except OSError as exc:
        raise IOError("cannot read %s: %s" % (path, exc)) from exc


def cmd_enroll(args) -> int:
    gf = gf2m.field(args.q_bits)
    feats = _load_features(gf, args.features)
    rng = random.Random(args.seed)
    variant = experiments.VARIANT_ALIASES[args.variant]
    if variant == "probabilistic":
        rec, secret = vault.enroll_probabilistic(gf, feats, args.k, rng)
    elif variant == "deterministic":
        rec, secret = vault.enroll_deterministic(gf, feats, args.k), None
    else:
        rec, secret = vault.enroll_blended(
            gf, feats, args.k, args.blend_size, args.ext_factor, rng
        )
    _write_text(args.out, vault.serialize(rec) + "\n")
    if secret is not None:
        coeff_field = rec.record_field()
        print(
            json.dumps({"secret": [coeff_field.to_hex(c) for c in secret]}),
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_unlock(args) -> int:
    rec = _load_record(args.record)
    gf = rec.field()
    feats = _load_features(gf, args.features)
    result = vault.unlock(rec, feats)
    if result is None:
        print("unlock failed", file=sys.stderr)
        return EXIT_OPERATION_FAILED
    secret, recovered = result
    coeff_field = rec.record_field()
    payload = {
        "features": [gf.to_hex(x) for x in sorted(recovered)],
    }
    if secret is not None:
        payload["secret"] = [coeff_field.to_hex(c) for c in secret]
    print(json.dumps(payload))
    return EXIT_OK


def cmd_attack(args) -> int:
    rec_a = _load_record(args.record_a)
    rec_b = _load_record(args.record_b)
    rng = random.Random(args.seed)
    res = attack.partial_recovery(rec_a, rec_b, rng)
    if isinstance(res, attack.Failure):
        print(json.dumps({"failure": res.reason.value}))
        return EXIT_OPERATION_FAILED
    gf = rec_a.record_field()
    print(
        json.dumps(
            {
                "omega_star": res.omega_star,
                "diff_a": [gf.to_hex(x) for x in sorted(res.diff_a)],
                "diff_b": [gf.to_hex(x) for x in sorted(res.diff_b)],
            }
        )
    )
    return EXIT_OK


_BOUNDS_HEADER = "q_bits,t,s,k,omega,d,bound,log2_value,value,case"
_NOT_ESTABLISHED = "not-established"


def _bounds_rows(q_bits, t, s, k, omegas):
    q = 1 << q_bits

    def fmt(name, omega, d, bv, case=""):
        if bv is None:
            return "%d,%d,%d,%d,%s,%s,%s,,%s," % (
                q_bits, t, s, k, omega, d, name, _NOT_ESTABLISHED
            )
        value = repr(float(bv.exact)) if bv.exact is not None else ""
        return "%d,%d,%d,%d,%s,%s,%s,%s,%s,%s" % (
            q_bits, t, s, k, omega, d, name,
            repr(bv.log2_value), value, bv.case or case,
        )

    single, baseline = bounds.single_record_bound(q, t, k)
    rows = [
        fmt("single_record", "", "", single),
        fmt("baseline_guess", "", "", baseline),
    ]
    for omega in omegas:
        d = t + s - 2 * omega
        rows.append(fmt("leakage_bits", omega, d, bounds.leakage_bound(q, t, s, k, d)))
        rows.append(fmt("full_upper", omega, d, bounds.full_recovery_upper_bound(q, t, s, k, omega)))
        rows.append(fmt("full_lower", omega, d, bounds.full_recovery_lower_bound(q, t, s, k, omega)))
        inter, diff = bounds.partial_bounds(q, t, s, k, omega)
        rows.append(fmt("partial_intersection", omega, d, inter))
        rows.append(fmt("partial_difference", omega, d, diff))
    return rows


def cmd_bounds(args) -> int:
    s = args.s if args.s is not None else args.t
    omegas = experiments.parse_omega_list(args.omega, s)
    q = 1 << args.q_bits
    if not 1 <= args.k <= s <= args.t <= q:
        raise ConfigError("need 1 <= k <= s <= t <= q")
    for om in omegas:
        if not 0 <= om <= s or args.t + s - om > q:
            raise ConfigError("omega %d out of range for these sizes" % om)
    rows = [_BOUNDS_HEADER] + _bounds_rows(args.q_bits, args.t, s, args.k, omegas)
    return _emit_plain(args, "\n".join(rows) + "\n")


def _emit_plain(args, text) -> int:
    try:
        _write_text(getattr(args, "out", None), text)
    except OSError as exc:
        print("cannot write %s: %s" % (args.out, exc), file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_plot(args) -> int:
    from . import plotting

    try:
        with open(args.csv) as fh:
            csv_text = fh.read()
    except OSError as exc:
        print("cannot read %s: %s" % (args.csv, exc), file=sys.stderr)
        return EXIT_IO
    try:
        plotting.render_success_rates(csv_text, args.out, title=args.title)
    except OSError as exc:
        print("cannot write %s: %s" % (args.out, exc), file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyvault",
        description="fuzzy vault record experiments, attacks, and bounds",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("experiment-partial", help="difference-set recovery sweep")
    _add_experiment_args(sub)
    sub.set_defaults(func=cmd_experiment_partial)

    sub = subs.add_parser("experiment-full", help="full set-pair recovery sweep")
    _add_experiment_args(sub, with_full_extras=True)
    sub.set_defaults(func=cmd_experiment_full)

    sub = subs.add_parser("enroll", help="create a record from a feature file")
    sub.add_argument("--q-bits", type=int, required=True)
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--features", type=str, required=True, help="JSON array of field elements")
    sub.add_argument("--variant", choices=sorted(experiments.VARIANT_ALIASES), default="prob")
    sub.add_argument("--blend-size", type=int, default=0)
    sub.add_argument("--ext-factor", type=int, default=2)
    sub.add_argument("--seed", type=int, default=None, help="secret/blend randomness (default: OS entropy)")
    sub.add_argument("--out", type=str, default=None, help="record path (default: stdout)")
    sub.set_defaults(func=cmd_enroll)

    sub = subs.add_parser("unlock", help="recover the secret from a record and features")
    sub.add_argument("--record", type=str, required=True)
    sub.add_argument("--features", type=str, required=True)
    sub.set_defaults(func=cmd_unlock)

    sub = subs.add_parser("attack", help="difference-set recovery on two record files")
    sub.add_argument("record_a")
    sub.add_argument("record_b")
    sub.add_argument("--seed", type=int, default=1)
    sub.set_defaults(func=cmd_attack)

    sub = subs.add_parser("bounds", help="tabulate security bounds over an overlap sweep")
    sub.add_argument("--q-bits", type=int, required=True)
    sub.add_argument("--t", type=int, required=True)
    sub.add_argument("--s", type=int, default=None)
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--omega", type=str, required=True)
    sub.add_argument("--out", type=str, default=None)
    sub.set_defaults(func=cmd_bounds)

    sub = subs.add_parser("plot", help="render a figure from experiment CSV")
    sub.add_argument("--csv", type=str, required=True)
    sub.add_argument("--out", type=str, required=True)
    sub.add_argument("--title", type=str, default=None)
    sub.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, vault.VaultError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION
    except IOError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
