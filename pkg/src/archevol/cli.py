"""Command-line interface.

Exit codes: 0 success, 1 violations or operation failure, 2 usage error
(unreadable input, unknown style/pattern), 3 internal error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .analysis import analyze_sequence, cpa_matrix
from .clientserver import RULE_SET_NAME, SEQUENCES, client_server_rules
from .cosa import check_architecture, encode
from .evolution import EvolutionError, OperationDescriptor, apply_descriptor
from .model import Architecture, ModelError
from .patterns import BUILTIN_PATTERNS, DecisionScript, run_pattern
from .styles import BUILTIN_STYLES, check_style, load_style

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def _load_architecture(path: str) -> Architecture:
    try:
        a = Architecture.load(path)
    except (OSError, json.JSONDecodeError, ModelError, KeyError) as exc:
        click.echo(f"error: cannot read architecture {path}: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    probs = a.problems()
    if probs:
        click.echo(f"error: invalid architecture {path}: " + "; ".join(probs), err=True)
        sys.exit(EXIT_USAGE)
    return a


def _print_report(report) -> int:
    if report.ok:
        click.echo("ok: no violations")
        return EXIT_OK
    for v in report.violations:
        click.echo(f"violation [{v.code}]: {v.message}")
    click.echo(f"{len(report.violations)} violation(s)")
    return EXIT_VIOLATIONS


@click.group()
def main():
    """Architecture evolution toolkit: validate, restructure, analyse."""


@main.command()
@click.argument("file", type=click.Path())
def validate(file):
    """Check an architecture against the metamodel and base invariants."""
    a = _load_architecture(file)
    report = check_architecture(a)
    sys.exit(_print_report(report))


@main.command("check-style")
@click.argument("file", type=click.Path())
@click.option("--style", "style_name", default="client-server",
              help="Built-in style name or path to a style file.")
def check_style_cmd(file, style_name):
    """Check an architecture against an architectural style."""
    a = _load_architecture(file)
    if style_name in BUILTIN_STYLES:
        style = BUILTIN_STYLES[style_name]()
    elif Path(style_name).exists():
        try:
            style = load_style(style_name)
        except (ModelError, json.JSONDecodeError, KeyError) as exc:
            click.echo(f"error: cannot read style {style_name}: {exc}", err=True)
            sys.exit(EXIT_USAGE)
    else:
        click.echo(f"error: unknown style {style_name}", err=True)
        sys.exit(EXIT_USAGE)
    sys.exit(_print_report(check_style(a, style)))


@main.command()
@click.argument("file", type=click.Path())
@click.option("--op", "op_name", required=True,
              type=click.Choice(["create", "delete", "move-port", "split",
                                 "merge", "move-in", "move-out", "delegate-port"]))
@click.option("--context", default="", help="Element reference the operation acts on.")
@click.option("--target", default=None, help="move-port: destination component.")
@click.option("--parent", default=None, help="move-in: destination parent.")
@click.option("--ports", multiple=True, help="split: port names to extract.")
@click.option("--components", multiple=True, help="merge: components to fuse.")
@click.option("--name", default=None, help="create/split/merge: new element name.")
@click.option("--kind", default="plain", help="create: component kind.")
@click.option("-o", "--out", required=True, type=click.Path())
def apply(file, op_name, context, target, parent, ports, components, name, kind, out):
    """Apply one evolution operation and write the result canonically."""
    a = _load_architecture(file)
    cli_to_op = {"move-port": "movePort", "split": "splitComponent",
                 "merge": "mergeComponents", "move-in": "moveIn",
                 "move-out": "moveOut", "delegate-port": "delegatePort",
                 "create": "create", "delete": "delete"}
    params = {}
    if target is not None:
        params["target"] = target
    if parent is not None:
        params["parent"] = parent
    if ports:
        params["ports"] = list(ports)
    if components:
        params["components"] = list(components)
    if name is not None:
        params["name"] = name
    if op_name == "create":
        params.setdefault("name", context)
        params["kind"] = kind
    try:
        d = OperationDescriptor(cli_to_op[op_name], context,
                                tuple(sorted(params.items())))
        result = apply_descriptor(a, d)
    except (EvolutionError, ModelError, KeyError) as exc:
        click.echo(f"operation failed: {exc}", err=True)
        sys.exit(EXIT_VIOLATIONS)
    result.save(out)
    click.echo(f"wrote {out}")
    sys.exit(EXIT_OK)


@main.command()
@click.argument("file", type=click.Path())
@click.option("--pattern", "pattern_name", default="client-server")
@click.option("--script", "script_path", required=True, type=click.Path())
@click.option("-o", "--out", required=True, type=click.Path())
def pattern(file, pattern_name, script_path, out):
    """Run an evolution pattern headlessly with a recorded decision script."""
    a = _load_architecture(file)
    if pattern_name not in BUILTIN_PATTERNS:
        click.echo(f"error: unknown pattern {pattern_name}", err=True)
        sys.exit(EXIT_USAGE)
    try:
        script = DecisionScript.load(script_path)
    except (OSError, json.JSONDecodeError, ModelError, KeyError) as exc:
        click.echo(f"error: cannot read decision script {script_path}: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    run = run_pattern(BUILTIN_PATTERNS[pattern_name](), a, script)
    for line in run.trace:
        click.echo(line)
    if run.state != "finished":
        click.echo(f"pattern run {run.state}: {run.diagnostic}", err=True)
        sys.exit(EXIT_VIOLATIONS)
    run.architecture.save(out)
    click.echo(f"wrote {out}")
    if run.final_report is not None and not run.final_report.ok:
        sys.exit(_print_report(run.final_report))
    sys.exit(EXIT_OK)


@main.command()
@click.option("--builtin", "builtin", default=RULE_SET_NAME,
              help="Name of the built-in rule set.")
@click.option("--format", "fmt", default="table", type=click.Choice(["table", "json"]))
@click.option("-o", "--out", default=None, type=click.Path(),
              help="Write the report here; a matrix figure (.png) is rendered "
                   "alongside it.")
def cpa(builtin, fmt, out):
    """Critical pair analysis of a rule set: the full pairwise matrix."""
    if builtin != RULE_SET_NAME:
        click.echo(f"error: unknown rule set {builtin}", err=True)
        sys.exit(EXIT_USAGE)
    matrix = cpa_matrix(list(client_server_rules().values()))
    text = matrix.to_table() if fmt == "table" else \
        json.dumps(matrix.to_dict(), indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
        from .viz import render_cpa_matrix
        figure = Path(out).with_suffix(".png")
        render_cpa_matrix(matrix, figure)
        click.echo(f"wrote {out} and {figure}")
    else:
        click.echo(text, nl=False)
        click.echo(matrix.to_adjacency(), nl=False)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--builtin", "builtin", required=True,
              type=click.Choice(sorted(SEQUENCES)))
@click.option("--host", "host_file", default=None, type=click.Path(),
              help="Architecture to run the sequence on (dynamic check).")
@click.option("--bind", "binds", multiple=True, metavar="NAME=VALUE",
              help="Rule parameter bindings.")
def sequence(builtin, host_file, binds):
    """Applicability analysis of a built-in rule sequence."""
    seq = SEQUENCES[builtin]()
    host = encode(_load_architecture(host_file)) if host_file else None
    bindings = dict(b.split("=", 1) for b in binds) or {"name": "Server" if "server" in builtin else "Client"}
    report = analyze_sequence(seq, host=host, bindings=bindings)
    for f in report.static_findings:
        click.echo(f"static finding at {f.position} [{f.kind}]: {f.detail}")
    if not report.static_findings:
        click.echo("no static findings")
    if report.dynamic is not None:
        ok, pos, trace = report.dynamic
        if ok:
            click.echo(f"applicable ({len(trace.steps)} rule applications)")
        else:
            click.echo(f"not applicable: fails at position {pos}")
            sys.exit(EXIT_VIOLATIONS)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--port", default=8008, type=int)
@click.option("--allow-origin", "origin", default="*")
def serve(port, origin):
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(allow_origin=origin), host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()
