"""Command-line entry point: ``congrkit <subcommand> [options]``.

Exit codes: 0 success, 2 parse error, 3 failed precondition, 4 failed
verification, 5 size cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import kazhdan, quotients
from .decompose import certificate_text, decompose_full, verify_certificate
from .errors import (CapExceededError, CongrkitError, InternalInvariantError, ParseError,
                     ToleranceError)
from .exact_matrix import IntMatrix, eval_word, random_word, steinberg_check
from .stable_range import corner_witness, level_witness, stabilize_witness

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_VERIFY, EXIT_CAP = 0, 2, 3, 4, 5


@dataclass
class RunConfig:
    command: str
    n: int = 3
    m: int = 2
    l: int = 1
    q: int = 2
    cap: int = quotients.DEFAULT_CAP
    tol: float = 1e-10
    maxiter: int = 100_000
    seed: int = 0
    format: str = "json"
    out: str | None = None


def _range(text: str) -> list[int]:
    """'a:b' inclusive, 'a,b,c', or a single integer."""
    if not text:
        return []
    if ":" in text:
        a, b = text.split(":")
        return list(range(int(a), int(b) + 1))
    return [int(x) for x in text.split(",") if x]


def _emit(cfg: RunConfig, payload, text: str | None = None) -> None:
    if cfg.format == "json" or text is None:
        body = json.dumps(payload, sort_keys=True, indent=2, default=kazhdan._json_default) + "\n"
    else:
        body = text if text.endswith("\n") else text + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)


def _header(cfg: RunConfig, **fields) -> dict:
    return {"schema": kazhdan.SCHEMA, "command": cfg.command, "seed": cfg.seed, **fields}


# --- subcommands ------------------------------------------------------------


def cmd_decompose(cfg: RunConfig, args) -> int:
    if args.input:
        with open(args.input) as fh:
            A = IntMatrix.from_text(fh.read())
    else:
        rng = np.random.default_rng(cfg.seed)
        A = eval_word(random_word(cfg.n, cfg.m, args.length, rng))
    dec = decompose_full(A, cfg.m)
    cert = certificate_text(dec)
    counts = dec.counts()
    summary = _header(cfg, n=dec.n, m=cfg.m, length=len(dec.word), budget=dec.budget,
                      counts=counts, residual=dec.residual.tolist())
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(cert)
        sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    else:
        sys.stdout.write(cert)
        sys.stderr.write(json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    with open(args.certificate) as fh:
        report = verify_certificate(fh.read())
    if report.ok:
        sys.stdout.write("ok\n")
        return EXIT_OK
    sys.stdout.write(f"FAIL line {report.line}: {report.message}\n")
    return EXIT_VERIFY


def _scan_point(point):
    return kazhdan.scan_row(*point)


def cmd_scan(cfg: RunConfig, args) -> int:
    if args.n_range:
        points = [(n, cfg.m) for n in _range(args.n_range)]
        xs = [p[0] for p in points]
    else:
        points = [(cfg.n, m) for m in _range(args.m_range)]
        xs = [p[1] for p in points]
    if args.jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_scan_point, points))
    else:
        rows = [_scan_point(p) for p in points]
    ok = [(x, r["kappa"]) for x, r in zip(xs, rows) if r["status"] == "exact"]
    slope = kazhdan.loglog_slope([a for a, _ in ok], [b for _, b in ok])
    if cfg.format == "csv":
        buf = io.StringIO()
        buf.write(f"# congrkit scan schema={kazhdan.SCHEMA} seed={cfg.seed} "
                  f"slope={'' if slope is None else repr(slope)}\n")
        w = csv.DictWriter(buf, fieldnames=kazhdan.SCAN_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
        _emit(cfg, None, buf.getvalue())
    else:
        _emit(cfg, _header(cfg, rows=rows, slope=slope))
    return EXIT_OK


def _build_group(cfg: RunConfig, family: str):
    if family == "sl":
        return quotients.sl_elementary(cfg.n, cfg.q, cfg.cap)
    if family == "congruence":
        return quotients.congruence_quotient(cfg.n, cfg.m, cfg.cap)
    if family == "semidirect":
        return quotients.build_semidirect(cfg.m, cfg.l, cfg.q, cfg.cap)
    raise ValueError(f"unknown family {family!r}")


def cmd_quotient(cfg: RunConfig, args) -> int:
    G = _build_group(cfg, args.family)
    payload = _header(cfg, group=G.describe())
    if args.family == "congruence":
        rep = quotients.verify_product_decomposition(cfg.n, cfg.m, cfg.cap)
        payload["coverage"] = asdict(rep)
    if args.edges:
        np.savetxt(args.edges, G.cayley_graph().edge_list(), fmt="%d")
    if args.keys:
        with open(args.keys, "wb") as fh:
            fh.write(G.dump_keys())
    text = f"{args.family} group of order {G.size} with {len(G.generators)} generators"
    _emit(cfg, payload, text)
    return EXIT_OK


def cmd_kazhdan(cfg: RunConfig, args) -> int:
    if args.family == "cyclic":
        res = kazhdan.cyclic_kappa(cfg.m)
    elif args.family == "congruence":
        res = kazhdan.congruence_kappa(cfg.n, cfg.m)
    else:
        G = _build_group(cfg, args.family)
        res = kazhdan.spectral_bounds(G.cayley_graph(), tol=cfg.tol, maxiter=cfg.maxiter)
    payload = _header(cfg, result=res.to_dict())
    _emit(cfg, payload, f"kappa in [{res.lower!r}, {res.upper!r}] ({', '.join(res.method)})")
    return EXIT_OK


def cmd_relative(cfg: RunConfig, args) -> int:
    G = quotients.build_semidirect(cfg.m, cfg.l, cfg.q, cfg.cap)
    res = kazhdan.relative_spectral_bound(G, quotients.translation_subgroup(G), tol=cfg.tol,
                                          maxiter=cfg.maxiter)
    _emit(cfg, _header(cfg, result=res.to_dict()),
          f"relative lower bound {res.lower!r}, dim H0 = {res.extra['dim_H0']}")
    return EXIT_OK


def cmd_demo(cfg: RunConfig, args) -> int:
    rep = kazhdan.nonuniform_demo(args.k, p=args.p, eps=args.eps, trials=args.trials,
                                  seed=cfg.seed)
    _emit(cfg, _header(cfg, report=rep.to_dict()),
          f"p = {rep.p}, curve = {rep.curve!r}, all below: {rep.all_below}")
    return EXIT_OK if rep.all_below else EXIT_VERIFY


# --- selftest ---------------------------------------------------------------


def _suite_steinberg(cfg, rng):
    for _ in range(200):
        n = int(rng.integers(3, 7))
        i, k, j = (int(x) for x in rng.choice(np.arange(1, n + 1), 3, replace=False))
        s, t = (int(x) or 1 for x in rng.integers(-9, 10, 2))
        if not steinberg_check(i, k, j, s, t, n):
            return False, f"[X_{i}{k}({s}), X_{k}{j}({t})]"
    return True, "200 commutators"


def _suite_coverage(cfg, rng):
    rep = quotients.verify_product_decomposition(3, 2, cfg.cap)
    return rep.covered and rep.quotient_size == 256, f"|E.F| = {rep.product_size}"


def _suite_stable_range(cfg, rng):
    from math import gcd

    done = 0
    while done < 100:
        n = int(rng.integers(3, 8))
        a = [int(x) or 1 for x in rng.integers(-10**6, 10**6, n)]
        m = int(rng.integers(1, 6))
        if math.gcd(*a) != 1:
            continue
        if not stabilize_witness(a).verify():
            return False, f"stable {a}"
        if gcd(*[m * v for v in a[:-1]], m * a[-1] + 1) == 1 and not level_witness(m, a).verify():
            return False, f"level {m} {a}"
        if gcd(*[m * m * v for v in a[:-1]], m * m * a[-1] + 1) == 1:
            if not corner_witness(m, a).verify():
                return False, f"corner {m} {a}"
        done += 1
    return True, "100 tuples"


def _suite_spectral(cfg, rng):
    for m in (3, 4, 6):
        G = quotients.enumerate_group([np.array([[1, 1], [0, 1]])], m)
        spec = kazhdan.spectral_bounds(G.cayley_graph(), tol=cfg.tol)
        exact = kazhdan.cyclic_kappa(m)
        if abs(spec.lower - exact.lower) > max(1e-8, 10 * cfg.tol):
            return False, f"C_{m}: {spec.lower} vs {exact.lower}"
    return True, "C_3, C_4, C_6"


def _suite_decompose(cfg, rng):
    for _ in range(20):
        A = eval_word(random_word(4, 2, 30, rng))
        if not decompose_full(A, 2).check():
            return False, "round trip"
    return True, "20 elements of Gamma_4(2)"


SUITES = (("steinberg", _suite_steinberg), ("coverage", _suite_coverage),
          ("stable-range", _suite_stable_range), ("spectral", _suite_spectral),
          ("decompose", _suite_decompose))


def cmd_selftest(cfg: RunConfig, args) -> int:
    rng = np.random.default_rng(cfg.seed)
    results = []
    failed = False
    for name, fn in SUITES:
        try:
            ok, detail = fn(cfg, rng)
            status = "pass" if ok else "FAIL"
        except CapExceededError as exc:
            ok, status, detail = True, "skipped", f"cap: {exc}"
        except (CongrkitError, AssertionError) as exc:
            ok, status, detail = False, "FAIL", f"{type(exc).__name__}: {exc}"
        failed |= not ok
        results.append({"suite": name, "status": status, "detail": detail})
    text = "\n".join(f"{r['status']:7s} {r['suite']}: {r['detail']}" for r in results)
    _emit(cfg, _header(cfg, suites=results), text)
    return EXIT_VERIFY if failed else EXIT_OK


# --- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=3)
    common.add_argument("--m", type=int, default=2)
    common.add_argument("--l", type=int, default=1)
    common.add_argument("--q", type=int, default=2)
    common.add_argument("--cap", type=int, default=None,
                        help="group size cap (default $CONGRKIT_CAP or 2000000)")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--maxiter", type=int, default=100_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--out", default=None)

    p = argparse.ArgumentParser(prog="congrkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", parents=[common], help="decompose a Gamma_n(m) matrix")
    d.add_argument("input", nargs="?", help="matrix file (n, then n rows); random if omitted")
    d.add_argument("--length", type=int, default=40, help="random word length")

    v = sub.add_parser("verify", parents=[common], help="re-check a certificate")
    v.add_argument("certificate")

    s = sub.add_parser("scan", parents=[common], help="sweep exact abelian kappa")
    s.add_argument("--m-range", default="2:20")
    s.add_argument("--n-range", default=None)
    s.add_argument("--jobs", type=int, default=1)

    q = sub.add_parser("quotient", parents=[common], help="enumerate a finite quotient")
    q.add_argument("--family", choices=("congruence", "sl", "semidirect"), default="congruence")
    q.add_argument("--edges", default=None, help="write the Cayley edge list here")
    q.add_argument("--keys", default=None, help="write canonical element keys here")

    k = sub.add_parser("kazhdan", parents=[common], help="Kazhdan constant or bounds")
    k.add_argument("--family", choices=("cyclic", "congruence", "sl", "semidirect"),
                   default="sl")

    sub.add_parser("relative", parents=[common], help="relative bound for a semidirect pair")

    n = sub.add_parser("demo-nonuniform", parents=[common], help="cyclic quotient demo")
    n.add_argument("--k", type=int, default=3)
    n.add_argument("--p", type=int, default=None)
    n.add_argument("--eps", type=float, default=None)
    n.add_argument("--trials", type=int, default=3)

    sub.add_parser("selftest", parents=[common], help="run the invariant suites")
    return p


COMMANDS = {"decompose": cmd_decompose, "verify": cmd_verify, "scan": cmd_scan,
            "quotient": cmd_quotient, "kazhdan": cmd_kazhdan, "relative": cmd_relative,
            "demo-nonuniform": cmd_demo, "selftest": cmd_selftest}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cap = args.cap if args.cap is not None else quotients.default_cap()
    cfg = RunConfig(args.command, args.n, args.m, args.l, args.q, cap, args.tol,
                    args.maxiter, args.seed, args.format, args.out)
    try:
        return COMMANDS[args.command](cfg, args)
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except CapExceededError as exc:
        sys.stderr.write(f"cap exceeded: {exc}\n")
        return EXIT_CAP
    except InternalInvariantError as exc:
        sys.stderr.write(f"internal check failed: {exc}\n")
        return EXIT_VERIFY
    except ToleranceError as exc:
        sys.stderr.write(f"tolerance failure: {exc}\n")
        return EXIT_VERIFY
    except (CongrkitError, ValueError) as exc:
        sys.stderr.write(f"precondition failed: {type(exc).__name__}: {exc}\n")
        return EXIT_PRECONDITION
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
