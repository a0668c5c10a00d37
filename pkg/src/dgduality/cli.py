"""Command-line front end.

    dgduality COMMAND ALGEBRA [--module SPEC] [--target SPEC] [--window I0:I1:J0:J1] ...

A module SPEC is ``A``, ``k`` or ``R`` with an optional twist and shift
(``A(-2)``, ``k(3)[-2]``), a truncation ``A>=3``, or the path of a module file.
``R`` is the dualizing module A(-a)[n] found by Gorenstein detection.
"""

from __future__ import annotations

import argparse
import csv
import os
import re
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import duality, homology, resolve
from .algebra import check_dga, parse_algebra
from .bigraded import Window
from .dgmodule import (check_module, cohomology, free_module, parse_module, residue_field,
                       shift_twist, truncate_ge)
from .errors import EngineError, InputError, NotGorenstein, WindowTooSmall
from .linalg import Field

CORPUS_DIR = Path(__file__).with_name("corpus")
DEFAULT_WINDOW = "-8:8:-4:4"
DEFAULT_TWISTS = "-5:5"

_SPEC = re.compile(r"^(A|k|R)(?:\((-?\d+)\))?(?:\[(-?\d+)\])?$")
_TRUNC = re.compile(r"^A>=(-?\d+)$")


def write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    with os.fdopen(fd, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def parse_twists(text):
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise InputError(f"bad twist range {text!r}, expected a:b") from None
    if lo > hi:
        raise InputError(f"empty twist range {text!r}")
    return lo, hi


def parse_window(text):
    try:
        return Window.parse(text)
    except (ValueError, TypeError) as exc:
        raise InputError(f"bad window {text!r}: {exc}") from None


def load_algebra(path, field=None, allow_char_2=False):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {path}")
    if field is not None:
        try:
            field = Field(field, allow_char_2=allow_char_2)
        except ValueError as exc:
            raise InputError(f"--field: {exc}") from None
    return parse_algebra(p.read_text(), str(p), field, allow_char_2)


class Session:
    """Algebra plus lazily detected dualizing module."""

    def __init__(self, A):
        self.A = A
        self._cert = None

    @property
    def cert(self):
        if self._cert is None:
            self._cert = duality.gorenstein_detect(self.A)
        return self._cert

    def dualizing(self):
        return duality.dualizing_module(self.A, self.cert)

    def module(self, spec):
        A = self.A
        m = _TRUNC.match(spec)
        if m:
            return truncate_ge(free_module(A), int(m.group(1)))
        m = _SPEC.match(spec)
        if m:
            base = {"A": lambda: free_module(A), "k": lambda: residue_field(A),
                    "R": self.dualizing}[m.group(1)]()
            return shift_twist(base, (int(m.group(2) or 0), int(m.group(3) or 0)))
        p = Path(spec)
        if not p.is_file():
            raise InputError(f"module spec {spec!r} is neither A/k/R(t)[s], A>=d nor a file")
        _, M = parse_module(p.read_text(), A, str(p))
        return M


def _emit(args, files, summary):
    """Write ``files`` under --out (or print them) and print the summary line."""
    if args.out:
        for name, text in files.items():
            write_atomic(Path(args.out) / name, text)
    else:
        for name, text in files.items():
            print(f"== {name}")
            sys.stdout.write(text)
    if summary:
        print(summary)


def _colim_files(stem, res):
    return {f"{stem}.csv": res.table.to_csv(),
            f"{stem}_stabilized_at.csv": res.stabilized_csv(),
            f"{stem}.warnings": res.warnings_text()}


def _report_files(stem, rep):
    files = {f"{stem}_mismatches.csv": rep.mismatches_csv(),
             f"{stem}_summary.txt": rep.summary() + "\n" + "".join(f"note {n}\n" for n in rep.notes)}
    for name, table in sorted(rep.tables.items()):
        files[f"{stem}_{name}.csv"] = table.to_csv()
    return files


def run_command(args):
    A = load_algebra(args.algebra, args.field, args.allow_char_2)
    s = Session(A)
    w = parse_window(args.window)
    cmd = args.command
    if cmd == "check-dga":
        rep = check_dga(A, w)
        text = "".join(f"{b.internal},{b.cohom},{msg}\n" for b, msg in rep.violations)
        status = "PASS" if rep.ok else "FAIL"
        _emit(args, {"check_dga.csv": "internal,cohomological,violation\n" + text},
              f"{status} check-dga {A.name} window={w} violations={len(rep.violations)}")
        if not rep.ok:
            return 2
        if args.module:
            M = s.module(args.module)
            bad = check_module(M, w)
            print(f"{'PASS' if not bad else 'FAIL'} check-module {M.name} violations={len(bad)}")
            return 2 if bad else 0
        return 0
    M = s.module(args.module or "A")
    if cmd == "cohomology":
        _emit(args, {"cohomology.csv": cohomology(M, w).to_csv()}, None)
        return 0
    if cmd == "ext":
        N = s.module(args.target or "A")
        _emit(args, {"ext.csv": homology.ext_table(M, N, w).to_csv()}, None)
        return 0
    if cmd == "localcoh":
        if args.cech:
            res = homology.local_cohomology_cech(M, w)
        else:
            res = homology.local_cohomology_colim(M, w)
        _emit(args, _colim_files("localcoh", res), None)
        return 0
    if cmd == "gamma":
        _emit(args, _colim_files("gamma", homology.derived_global_sections(M, w)), None)
        return 0
    if cmd == "ext-qgr":
        N = s.module(args.target or "R")
        _emit(args, _colim_files("ext_qgr", homology.ext_qgr(M, N, w)), None)
        return 0
    if cmd == "gorenstein":
        cert = duality.gorenstein_detect(A, None if args.window_given is None else w)
        _emit(args, {"gorenstein_evidence.csv": cert.evidence.to_csv()},
              f"{'PASS' if cert.gorenstein_in_window else 'FAIL'} gorenstein {A.name} {cert}")
        return 0 if cert.gorenstein_in_window else 1
    R = s.module(args.target) if args.target else s.dualizing()
    twists = parse_twists(args.twists)
    if cmd == "balanced":
        rep = duality.balanced_check(A, R, w)
    elif cmd == "local-duality":
        rep = duality.local_duality_check(M, R, w)
    elif cmd == "serre":
        rep = duality.serre_duality_check(M, R, w, twists)
    elif cmd == "chi":
        rep = duality.condition_chi_check(A, M, w)
    elif cmd == "vanishing":
        rep = duality.vanishing_range_check(M, R, w, twists)
    elif cmd == "reflexive":
        rep = duality.reflexivity_check(M, R, w)
    else:
        raise InputError(f"unknown command {cmd!r}")
    _emit(args, _report_files(cmd.replace("-", "_"), rep), rep.summary())
    return 0 if rep.passed else 1


# ---------------------------------------------------------------------------
# corpus


def read_index(directory):
    directory = Path(directory)
    files = sorted(directory.glob("*.dga"))
    if not files:
        raise InputError(f"corpus directory {directory} has no .dga entries")
    index = directory / "index.csv"
    if not index.is_file():
        return [{"file": f.name, "a": None, "n": None, "window": "-4:4:-3:3", "twists": "-3:3",
                 "expect": False} for f in files]
    entries = []
    with open(index, newline="") as fh:
        for row in csv.DictReader(fh):
            gor = row["a"].strip() != ""
            entries.append({"file": row["file"], "a": int(row["a"]) if gor else None,
                            "n": int(row["n"]) if gor else None, "window": row["window"],
                            "twists": row["twists"], "expect": True})
    if not entries:
        raise InputError(f"corpus index {index} lists no entries")
    return entries


def _negative_twist(a):
    # A(0)[n] is the dualizing module itself when a = 0
    return 0 if a != 0 else 1


def run_entry(entry, directory, cache_dir):
    """All checks on one corpus entry; returns (rows, files) with rows (entry, check, status, mism, unst)."""
    resolve.set_cache_dir(cache_dir)
    stem = Path(entry["file"]).stem
    rows, files = [], {}

    def record(check, rep):
        rows.append((stem, check, rep.status(), len(rep.mismatches), len(rep.unstable)))
        for name, text in _report_files(check, rep).items():
            files[f"{stem}/{name}"] = text

    try:
        A = load_algebra(Path(directory) / entry["file"])
    except InputError as exc:
        return [(stem, "parse", "ERROR2", 0, 0)], {f"{stem}/error.txt": str(exc) + "\n"}
    w = parse_window(entry["window"])
    twists = parse_twists(entry["twists"])
    try:
        c1 = duality.gorenstein_detect(A)
        c2 = duality.gorenstein_detect(A, duality.default_gorenstein_window(A, 2))
        agree = (c1.gorenstein_in_window, c1.a, c1.n) == (c2.gorenstein_in_window, c2.a, c2.n)
        expected = (entry["a"] is not None, entry["a"], entry["n"])
        ok = agree and (not entry["expect"] or (c1.gorenstein_in_window, c1.a, c1.n) == expected)
        rows.append((stem, "gorenstein", "PASS" if ok else "FAIL", 0 if ok else 1, 0))
        files[f"{stem}/gorenstein.txt"] = (f"window1 {c1}\nwindow2 {c2}\n"
                                           f"expected a={entry['a']} n={entry['n']}\n")
        if not c1.gorenstein_in_window:
            return rows, files
        a, n = (entry["a"], entry["n"]) if entry["expect"] and entry["a"] is not None else (c1.a, c1.n)
        R = free_module(A, -a, n)
        record("balanced", duality.balanced_check(A, R, w))
        neg = duality.balanced_check(A, free_module(A, _negative_twist(a), n), w)
        rows.append((stem, "balanced_negative", "PASS" if not neg.passed else "FAIL",
                     len(neg.mismatches), len(neg.unstable)))
        for spec, M in (("A", free_module(A)), ("k", residue_field(A)), ("A(-2)", free_module(A, -2))):
            record(f"local_duality_{spec}", duality.local_duality_check(M, R, w))
        record("serre_A", duality.serre_duality_check(free_module(A), R, w, twists))
        record("vanishing_A", duality.vanishing_range_check(free_module(A), R, w, twists))
        record("chi_A", duality.condition_chi_check(A, free_module(A), w))
    except WindowTooSmall as exc:
        rows.append((stem, "window", "ERROR3", 0, 0))
        files[f"{stem}/error.txt"] = str(exc) + "\n"
    return rows, files


_STATUS_CODE = {"PASS": 0, "UNCERTIFIED": 0, "FAIL": 1, "ERROR2": 2, "ERROR3": 3}


def run_corpus(directory, out, jobs=1, cache_dir=None):
    entries = read_index(directory)
    results = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = [pool.submit(run_entry, e, str(directory), cache_dir) for e in entries]
            results = [f.result() for f in futs]
    else:
        results = [run_entry(e, str(directory), cache_dir) for e in entries]
    rows = [r for rs, _ in results for r in rs]
    lines = ["entry,check,status,mismatches,unstable"]
    lines += [",".join(str(x) for x in r) for r in rows]
    summary = "\n".join(lines) + "\n"
    if out:
        for _, files in results:
            for name in sorted(files):
                write_atomic(Path(out) / name, files[name])
        write_atomic(Path(out) / "summary.csv", summary)
    code = max((_STATUS_CODE[r[2]] for r in rows), default=0)
    return code, rows, summary


# ---------------------------------------------------------------------------
# entry point

COMMANDS = ("check-dga", "cohomology", "ext", "localcoh", "gamma", "ext-qgr", "gorenstein",
            "balanced", "local-duality", "serre", "chi", "vanishing", "reflexive", "corpus")


def build_parser():
    p = argparse.ArgumentParser(prog="dgduality",
                                description="Duality checks for graded-commutative dg-algebras.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("algebra", nargs="?", help="algebra or module file (corpus: directory)")
    p.add_argument("--module", help="source module SPEC (default A)")
    p.add_argument("--target", help="target module SPEC (default A for ext, R for checks)")
    p.add_argument("--window", default=None, help=f"imin:imax:jmin:jmax (default {DEFAULT_WINDOW})")
    p.add_argument("--twists", default=DEFAULT_TWISTS, help="twist range a:b")
    p.add_argument("--field", type=int, default=None, help="override the prime p")
    p.add_argument("--allow-char-2", action="store_true")
    p.add_argument("--cech", action="store_true", help="localcoh via the Cech complex")
    p.add_argument("--out", help="output directory (default: print)")
    p.add_argument("--cache", help="resolution cache directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for corpus")
    return p


def _join_values(argv):
    # let "--window -8:8:-4:4" through: argparse reads the value as an option
    out, it = [], iter(argv)
    for a in it:
        if a in ("--window", "--twists"):
            out.append(f"{a}={next(it, '')}")
        else:
            out.append(a)
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_values(argv))
    args.window_given = args.window
    args.window = args.window or DEFAULT_WINDOW
    resolve.set_cache_dir(args.cache)
    try:
        if args.command == "corpus":
            code, rows, summary = run_corpus(args.algebra or CORPUS_DIR, args.out,
                                             max(1, args.jobs), args.cache)
            sys.stdout.write(summary)
            bad = [r for r in rows if _STATUS_CODE[r[2]]]
            print(("FAIL corpus: " + ", ".join(f"{r[0]}:{r[1]}" for r in bad)) if bad
                  else f"PASS corpus checks={len(rows)}")
            return code
        if not args.algebra:
            raise InputError("missing algebra file")
        return run_command(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except WindowTooSmall as exc:
        print(f"window too small: {exc}", file=sys.stderr)
        return 3
    except NotGorenstein as exc:
        print(f"not Gorenstein: {exc}", file=sys.stderr)
        return 1
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return getattr(exc, "exit_code", 2)


if __name__ == "__main__":
    sys.exit(main())
