"""
Command-line interface.

Results go to stdout (JSON is canonical: sorted keys, canonical bracket text);
diagnostics go to stderr. Exit codes: 0 success, 1 validation or precondition
failure, 2 bracket syntax error, 64 usage error.
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple, Union

from dotenv import load_dotenv

from certify import certify_half_grope, certify_height, certify_k_slice, verify_certificate
from errors import BracketSyntaxError, GropeTowerError, ValidationError
from grope import CappedGrope, grope_class
from hybrid import PUNCTURED_LEAF, grope_to_tower, tower_to_grope
from oracle import enumerate_brackets, enumerate_unrooted
from report_generator import ReportGenerator
from rewrite import ihx_rewrite, ihx_site_for_edge, normalize_right_normed, normalize_simple
from tower import RawTower, SplitTower, extract_split, tower_order
from trees import (
    Bracket,
    PuncturedTree,
    UnrootedTree,
    degree,
    parse_bracket,
    parse_punctured,
    parse_tree,
    render_bracket,
    render_punctured,
)
from utils import dump_json, format_order, format_verdict, load_json_file

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_SYNTAX = 2
EXIT_USAGE = 64

LOG_LEVEL_VAR = "GROPE_TOWER_LOG_LEVEL"

Output = Tuple[Any, List[str]]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- Inputs --------------------------------------------------------------------------

def read_expression(text: str) -> Union[Bracket, PuncturedTree, UnrootedTree]:
    """``p(A,B)`` is punctured, ``label:B`` unrooted, anything else a bracket"""
    stripped = text.strip()
    if stripped.startswith("p("):
        return parse_punctured(text)
    if ":" in stripped:
        return parse_tree(text)
    return parse_bracket(text)


def load_grope(path: str) -> CappedGrope:
    return CappedGrope.from_json(load_json_file(path, "grope"))


def load_tower(path: str) -> SplitTower:
    """Split towers load directly; raw towers (with ``points``) are split first"""
    data = load_json_file(path, "tower", "raw-tower")
    if "points" in data:
        return extract_split(RawTower.from_json(data))
    return SplitTower.from_json(data)


def parse_prefer(text: Optional[str]) -> Optional[List[Union[None, int, str]]]:
    """Comma list, one entry per tree: ``-`` default, ``#N`` vertex N, ``@puncture``, or a label"""
    if text is None:
        return None
    out: List[Union[None, int, str]] = []
    for item in text.split(","):
        item = item.strip()
        if item in ("", "-"):
            out.append(None)
        elif item == PUNCTURED_LEAF:
            out.append(item)
        elif item.startswith("#"):
            try:
                out.append(int(item[1:]))
            except ValueError:
                raise ValidationError(f"Invalid vertex preference {item!r}") from None
        else:
            out.append(item)
    return out


# -- Rendering -----------------------------------------------------------------------

def _dot_node(name: str, label: Optional[str]) -> str:
    if label is None:
        return f'  {name} [shape=circle, style=filled, fillcolor=black, label="", width=0.1];'
    return f'  {name} [shape=plaintext, label="{label}"];'


def render_dot(x: Union[Bracket, PuncturedTree, UnrootedTree]) -> str:
    """DOT digraph: trivalent vertices as filled points, leaves labeled, the puncture dashed"""
    lines = ["digraph tree {", "  edge [arrowhead=none];"]
    if isinstance(x, Bracket):
        nodes: List[str] = []
        edges: List[str] = []

        def visit(node: Bracket) -> int:
            i = len(nodes)
            nodes.append(_dot_node(f"n{i}", node.label if node.is_leaf else None))
            if not node.is_leaf:
                for child in node.children:
                    edges.append(f"  n{i} -> n{visit(child)};")
            return i

        visit(x)
        lines.extend(nodes + edges)
    else:
        tree = x.tree if isinstance(x, PuncturedTree) else x
        puncture = x.puncture if isinstance(x, PuncturedTree) else None
        for v, label in enumerate(tree.labels):
            lines.append(_dot_node(f"n{v}", label))
        for e, (u, v) in enumerate(tree.edges):
            style = " [style=dashed]" if e == puncture else ""
            lines.append(f"  n{u} -> n{v}{style};")
    lines.append("}")
    return "\n".join(lines)


# -- Subcommands -----------------------------------------------------------------------

def cmd_degree(args) -> Output:
    d = degree(read_expression(args.expr))
    return {"degree": d}, [str(d)]


def cmd_class(args) -> Output:
    per_surface, overall = grope_class(load_grope(args.file))
    lines = [f"{s}: {c}" for s, c in per_surface.items()] + [f"class: {overall}"]
    return {"class": overall, "per_surface": per_surface}, lines


def cmd_order(args) -> Output:
    order = tower_order(load_tower(args.file))
    return {"order": order.to_json()}, [format_order(order)]


def cmd_convert(args) -> Output:
    if args.direction == "grope-to-tower":
        tower = grope_to_tower(load_grope(args.file))
        payload = tower.to_json()
        return payload, [render_punctured(tp) for tp in tower.trees]
    grope = tower_to_grope(load_tower(args.file), parse_prefer(args.prefer))
    payload = grope.to_json()
    return payload, [f"{s}: {b}" for s, b in grope.brackets()]


def cmd_normalize(args) -> Output:
    if args.rooted:
        out = [render_bracket(b) for b in normalize_right_normed(parse_bracket(args.expr))]
    else:
        out = [t.canonical_key for t in normalize_simple(parse_tree(args.expr))]
    return {"trees": out}, out


def cmd_ihx(args) -> Output:
    t = parse_tree(args.expr)
    site = ihx_site_for_edge(t, args.edge)
    outputs = [o.canonical_key for o in ihx_rewrite(t, site)]
    return {"tree": t.canonical_key, "site": site.to_json(), "outputs": outputs}, outputs


def cmd_certify(args) -> Output:
    grope = load_grope(args.file)
    if args.kind == "height":
        certificate = certify_height(grope)
    elif args.kind == "half-grope":
        certificate = certify_half_grope(grope)
    else:
        certificate = certify_k_slice(grope, args.k)
    payload = certificate.to_json()
    return payload, ReportGenerator().generate_text_report(payload, args.file).splitlines()


def cmd_verify(args) -> Output:
    result = verify_certificate(load_json_file(args.file, "certificate"))
    lines = [f"{result.kind} certificate: {format_verdict(result.ok)}"] + [f"  - {p}" for p in result.problems]
    return result.to_json(), lines


def cmd_enumerate(args) -> Output:
    leaves = [label.strip() for label in args.leaves.split(",") if label.strip()]
    if args.unrooted:
        keys = [t.canonical_key for t in enumerate_unrooted(leaves)]
    else:
        keys = [render_bracket(b) for b in enumerate_brackets(leaves)]
    return {"count": len(keys), "trees": keys}, keys


def cmd_render(args) -> Output:
    x = read_expression(args.expr)
    return {"tree": str(x), "dot": render_dot(x)}, render_dot(x).splitlines()


def cmd_report(args) -> Output:
    payload = load_json_file(args.file, "certificate")
    generator = ReportGenerator()
    if args.format == "csv":
        return None, generator.generate_csv_report(payload).splitlines()
    if args.format == "json":
        return None, generator.generate_json_report(payload, args.file).splitlines()
    return None, generator.generate_text_report(payload, args.file).splitlines()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grope-tower", description="Tree calculus of gropes and Whitney towers")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text, formats=("text", "json"), default="text"):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        p.add_argument("--format", choices=formats, default=default)
        return p

    add("degree", cmd_degree, "Vassiliev degree of a tree").add_argument("expr")
    add("class", cmd_class, "class of a capped grope").add_argument("file")
    add("order", cmd_order, "order of a Whitney tower").add_argument("file")

    p = add("convert", cmd_convert, "convert between gropes and towers", default="json")
    p.add_argument("direction", choices=["grope-to-tower", "tower-to-grope"])
    p.add_argument("file")
    p.add_argument("--prefer", help="per tree: -, #VERTEX, LABEL or @puncture")

    p = add("normalize", cmd_normalize, "rewrite into simple (or right-normed) trees")
    p.add_argument("expr")
    p.add_argument("--rooted", action="store_true")

    p = add("ihx", cmd_ihx, "apply IHX at an internal edge")
    p.add_argument("expr")
    p.add_argument("--edge", type=int, required=True)

    p = add("certify", cmd_certify, "build a certificate", default="json")
    p.add_argument("kind", choices=["height", "half-grope", "k-slice"])
    p.add_argument("file")
    p.add_argument("--k", type=int, default=1)

    add("verify", cmd_verify, "re-check a certificate").add_argument("file")

    p = add("enumerate", cmd_enumerate, "all trees on a leaf multiset")
    p.add_argument("--leaves", required=True)
    p.add_argument("--unrooted", action="store_true")

    add("render", cmd_render, "export a tree", formats=("dot", "json"), default="dot").add_argument("expr")
    add("report", cmd_report, "render a certificate report", formats=("text", "json", "csv")).add_argument("file")
    return parser


def configure_logging() -> None:
    load_dotenv()
    level = os.getenv(LOG_LEVEL_VAR, "WARNING").upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def run(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        payload, lines = args.handler(args)
    except BracketSyntaxError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SYNTAX
    except GropeTowerError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE

    if args.format == "json" and payload is not None:
        print(dump_json(payload), file=out)
    else:
        print("\n".join(lines), file=out)

    if args.command == "verify" and not payload["ok"]:
        return EXIT_FAILURE
    return EXIT_OK


def main() -> None:
    configure_logging()
    sys.exit(run())


if __name__ == "__main__":
    main()
