"""Shared plumbing: dataclass config to argparse, CSV emission."""

import argparse
import csv
import dataclasses
import sys


def parse_config(cls, argv=None, description=None):
    p = argparse.ArgumentParser(description=description or cls.__doc__)
    for f in dataclasses.fields(cls):
        default = f.default
        flag = "--" + f.name.replace("_", "-")
        if isinstance(default, tuple):
            p.add_argument(flag, type=lambda s: tuple(int(t) for t in s.split(",")), default=default,
                           help=f"comma-separated (default {','.join(map(str, default))})")
        else:
            p.add_argument(flag, type=type(default), default=default, help=f"default {default}")
    p.add_argument("--output", "-o", default=None, help="CSV file (default: stdout)")
    ns = vars(p.parse_args(argv))
    out = ns.pop("output")
    return cls(**ns), out


def write_rows(header, rows, output=None, config=None):
    fh = open(output, "w", newline="") if output else sys.stdout
    try:
        if config is not None:
            for k, v in dataclasses.asdict(config).items():
                fh.write(f"# {k}: {v}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if output:
            fh.close()
