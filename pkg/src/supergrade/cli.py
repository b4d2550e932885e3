"""Command-line front end: build configs, run checks, emit reports.

Exit codes: 0 when the verdict passes, 1 when it fails, 2 on configuration
errors and on errors raised while a claim was being checked.
"""

import argparse
import asyncio
import logging
import sys
import time
from pathlib import Path
from typing import Any, Optional, Sequence

from pydantic import ValidationError

from .abelian_group import (
    FiniteAbelianGroup,
    character_annihilator,
    generated_subgroup,
    subgroups,
    supports_generate,
)
from .classify import (
    TypeASpec,
    TypeQSpec,
    build_type_A,
    build_type_Q,
    canonicalize,
    enumerate_admissible,
    falsify_lemma51,
    falsify_thm43,
    lemma65_check,
    lemma65_survey,
    merge_enumerations,
    partition_ranges,
    verify_thm52,
    verify_thm53,
    verify_thm68,
)
from .config_utils import (
    CONFIG_KEYS,
    ConfigSemanticError,
    ConfigValidator,
    bounds_from_env,
    load_config_file,
)
from .errors import ClaimError, ConfigError, SupergradeError
from .grading import (
    ElementarySpec,
    Grading,
    PauliSpec,
    TensorSpec,
    build_grading,
    elementary_grading,
    identity_component,
    is_fine,
    is_super_compatible,
    pauli_fine_grading,
)
from .schemas import Bounds, ClaimResult, Command, OutputFormat, Report, RunConfig, Verdict
from .storage import ReportStore, StorageError, encode_json, encode_report
from .super_structures import (
    StructureKind,
    build_b_lie,
    build_osp_jordan,
    build_p_jordan,
    decomposition_check,
    structure_parameters,
    structure_report,
    structure_signature,
)
from .superinvolution import (
    H_space,
    K_space,
    Superinvolution,
    graded_violation,
    restriction_is_involution,
    thm52_phi,
)
from .supermatrix import SuperSignature

logger = logging.getLogger(__name__)

INVOLUTION_KINDS = ("osp", "osp-thm52", "trp", "exchange")
CLAIM_ALIASES = {
    "5.1": "Lemma5.1", "4.3": "Thm4.3", "5.2": "Thm5.2", "5.3": "Thm5.3",
    "6.5": "Lemma6.5", "6.8": "Thm6.8",
}


# ========== Config helpers ==========

def _require(config: RunConfig, *keys: str) -> None:
    missing = [k for k in keys if getattr(config, k) is None]
    if missing:
        raise ConfigSemanticError(f"{config.command.value} needs {', '.join(missing)}")


def _group(config: RunConfig) -> FiniteAbelianGroup:
    return FiniteAbelianGroup.parse(config.group or "1")


def _sizes(text: Optional[str]) -> Optional[tuple[int, ...]]:
    if text is None:
        return None
    return tuple(int(x) for x in text.split(",") if x.strip())


def _claim_name(text: Optional[str]) -> Optional[str]:
    if text is None:
        return None
    return CLAIM_ALIASES.get(text, text)


def build_involution(name: str, sig: SuperSignature, order: int,
                     p: Optional[Sequence[int]] = None, q: Optional[Sequence[int]] = None) -> Superinvolution:
    """Named superinvolution on sig; osp-thm52 takes its blocks from p and q."""
    if name == "osp":
        return Superinvolution.osp(sig, order)
    if name == "trp":
        if sig.n != sig.m:
            raise ConfigSemanticError(f"trp needs n = m, got ({sig})")
        return Superinvolution.trp(sig, order)
    if name == "osp-thm52":
        if p is None or q is None:
            raise ConfigSemanticError("osp-thm52 needs p and q")
        if (sum(p), sum(q)) != (sig.n, sig.m):
            raise ConfigSemanticError(f"Block sizes p={p} q={q} do not fill ({sig})")
        return thm52_phi(p, q, order)
    if name == "exchange":
        return Superinvolution.exchange(sig, order)
    raise ConfigSemanticError(f"Unknown involution {name!r}; expected one of {', '.join(INVOLUTION_KINDS)}")


def _fine_spec(config: RunConfig, group: FiniteAbelianGroup) -> PauliSpec:
    """Pauli factor from fine_k and embedding; k = 0 needs no embedding."""
    fine_k = config.fine_k or 0
    if config.embedding is not None:
        embedding = group.parse_elements(config.embedding)
    else:
        embedding = () if fine_k == 0 else None
    return PauliSpec(fine_k, group, embedding)


def _grading_summary(grading: Grading) -> dict[str, Any]:
    return {
        "dimensions": grading.dimension_map(),
        "support_generates": grading.support_generates(),
        "super_compatible": is_super_compatible(grading),
        "fine": is_fine(grading),
        "identity_component_dim": identity_component(grading).dim,
    }


# ========== Commands ==========

def run_group(config: RunConfig) -> ClaimResult:
    _require(config, "group")
    group = _group(config)
    details: dict[str, Any] = {
        "invariant_factors": list(group.invariant_factors),
        "order": group.order,
        "exponent": group.exponent,
        "rank": group.rank,
        "cyclotomic_order": group.cyclotomic_order(),
        "subgroups": len(subgroups(group)),
    }
    if config.elements is not None:
        elements = group.parse_elements(config.elements)
        sub = generated_subgroup(group, elements)
        details["generated_order"] = sub.order
        details["generates"] = supports_generate(group, elements)
        details["annihilator_size"] = len(character_annihilator(sub))
    return ClaimResult(claim="group", instance=f"group={group.render()}", passed=True, details=details)


def run_grade(config: RunConfig) -> ClaimResult:
    kind = config.kind or "elementary"
    group = _group(config)
    details: dict[str, Any] = {"kind": kind}
    label = None
    if kind == "elementary":
        _require(config, "sig", "theta")
        sig = SuperSignature.parse(config.sig)
        grading = elementary_grading(group, group.parse_elements(config.theta), sig)
    elif kind == "pauli":
        _require(config, "k")
        embedding = group.parse_elements(config.embedding) if config.embedding else None
        sig = SuperSignature.parse(config.sig) if config.sig else None
        grading = pauli_fine_grading(config.k, group if config.group else None, embedding, sig)
    elif kind == "typeA":
        _require(config, "group", "elements", "p", "q")
        spec = TypeASpec(group, group.parse_elements(config.elements), _sizes(config.p), _sizes(config.q))
        grading, built = build_type_A(spec)
        details.update(built)
        details["permutation"] = list(canonicalize(spec).permutation)
    elif kind == "typeQ":
        _require(config, "group", "h", "elements")
        elements = group.parse_elements(config.elements)
        sizes = _sizes(config.p) or (1,) * len(elements)
        spec = TypeQSpec(group, group.parse_element(config.h), elements, sizes)
        grading, built = build_type_Q(spec)
        details.update(built)
        details["permutation"] = list(canonicalize(spec).permutation)
    elif kind == "tensor":
        _require(config, "sig", "theta", "fine_k")
        elem = ElementarySpec(group, group.parse_elements(config.theta), SuperSignature.parse(config.sig))
        grading = build_grading(TensorSpec(elem, _fine_spec(config, group)))
        details["elementary_signature"] = elem.signature.render()
        details["fine_k"] = config.fine_k
        label = f"theta={elem.render()} fine_k={config.fine_k}"
    else:
        raise ConfigSemanticError(
            f"Unknown grading kind {kind!r}; expected elementary, pauli, typeA, typeQ or tensor"
        )
    details.update(_grading_summary(grading))
    return ClaimResult(
        claim="grading",
        instance=f"{kind} group={grading.group.render()} sig={grading.signature} {label or grading.label}",
        passed=details["super_compatible"],
        details=details,
    )


def run_involution(config: RunConfig) -> ClaimResult:
    _require(config, "sig")
    group = _group(config)
    sig = SuperSignature.parse(config.sig)
    name = config.inv or "osp"
    inv = build_involution(name, sig, group.cyclotomic_order(), _sizes(config.p), _sizes(config.q))
    h_dim, k_dim = H_space(inv).dim, K_space(inv).dim
    details: dict[str, Any] = {
        "signature": inv.signature.render(),
        "axioms": True,
        "even_restriction_involution": restriction_is_involution(inv.map),
        "H_dim": h_dim,
        "K_dim": k_dim,
        "H_plus_K_is_everything": h_dim + k_dim == inv.signature.size ** 2,
    }
    if config.theta is not None:
        grading = elementary_grading(group, group.parse_elements(config.theta), inv.signature)
        bad = graded_violation(inv, grading)
        details["graded"] = bad is None
        details["violation"] = bad.render() if bad is not None else None
    passed = all(v for v in details.values() if isinstance(v, bool))
    return ClaimResult(claim="superinvolution", instance=f"{inv.label} sig={sig}", passed=passed, details=details)


def run_enumerate(config: RunConfig, parts: int = 1) -> ClaimResult:
    _require(config, "group", "sig")
    group = _group(config)
    sig = SuperSignature.parse(config.sig)
    kind = config.inv or "osp"
    if parts <= 1:
        result = enumerate_admissible(group, sig.n, sig.m, kind, config.bounds)
    else:
        total = group.order ** sig.size
        slices = [
            enumerate_admissible(group, sig.n, sig.m, kind, config.bounds, index_range=r)
            for r in partition_ranges(total, parts)
        ]
        result = merge_enumerations(slices)
    return result.to_claim()


def run_falsify(config: RunConfig) -> ClaimResult:
    claim = _claim_name(config.claim)
    if claim == "Lemma5.1":
        _require(config, "group", "h", "elements")
        group = _group(config)
        elements = group.parse_elements(config.elements)
        sizes = _sizes(config.p) or (1,) * len(elements)
        spec = TypeQSpec(group, group.parse_element(config.h), elements, sizes)
        return falsify_lemma51(spec, config.bounds)
    if claim == "Thm4.3":
        return falsify_thm43(config.k if config.k is not None else 1, config.bounds)
    raise ConfigSemanticError(f"falsify supports Lemma5.1 and Thm4.3, got {config.claim!r}")


def run_verify(config: RunConfig) -> ClaimResult:
    claim = _claim_name(config.claim)
    group = _group(config)
    if claim == "Thm5.2":
        _require(config, "elements", "p", "q")
        return verify_thm52(group, group.parse_elements(config.elements), _sizes(config.p), _sizes(config.q))
    if claim == "Thm5.3":
        _require(config, "elements", "perm")
        return verify_thm53(group, group.parse_elements(config.elements), _sizes(config.perm), _sizes(config.p))
    if claim == "Thm6.8":
        _require(config, "sig", "theta")
        sig = SuperSignature.parse(config.sig)
        elem = ElementarySpec(group, group.parse_elements(config.theta), sig)
        inv = build_involution(config.inv or "osp-thm52", sig, group.cyclotomic_order(),
                               _sizes(config.p), _sizes(config.q))
        return verify_thm68(elem, inv, _fine_spec(config, group))
    if claim == "Lemma6.5":
        if config.theta is not None:
            _require(config, "sig")
            sig = SuperSignature.parse(config.sig)
            return lemma65_check(elementary_grading(group, group.parse_elements(config.theta), sig))
        return lemma65_survey(group, max_size=min(4, config.bounds.max_size))
    raise ConfigSemanticError(f"verify supports Thm5.2, Thm5.3, Thm6.8 and Lemma6.5, got {config.claim!r}")


def _structure_shape(config: RunConfig, kind: StructureKind) -> tuple[SuperSignature, int, int]:
    if config.sig is not None:
        sig = SuperSignature.parse(config.sig)
        n, m = structure_parameters(kind, sig)
        return sig, n, m
    _require(config, "n")
    n, m = config.n, config.m or 0
    return structure_signature(kind, n, m), n, m


def run_structure(config: RunConfig) -> ClaimResult:
    _require(config, "kind")
    try:
        kind = StructureKind(config.kind)
    except ValueError:
        raise ConfigSemanticError(f"Unknown structure kind {config.kind!r}")
    group = _group(config)
    sig, n, m = _structure_shape(config, kind)
    order = group.cyclotomic_order()
    theta = group.parse_elements(config.theta) if config.theta else (group.identity(),) * sig.size
    grading = elementary_grading(group, theta, sig, order)
    default_inv = "trp" if kind == StructureKind.P_JORDAN else "osp"
    inv = build_involution(config.inv or default_inv, sig, order, _sizes(config.p), _sizes(config.q))
    if kind == StructureKind.OSP_JORDAN:
        structure = build_osp_jordan(n, m, inv, grading)
    elif kind == StructureKind.P_JORDAN:
        structure = build_p_jordan(n, inv, grading)
    else:
        structure = build_b_lie(n, m, inv, grading)
    result = structure_report(structure)
    if config.fine_k is not None:
        decomposition = decomposition_check(structure, _fine_spec(config, group))
        result.details["decomposition"] = decomposition.details
        result.passed = result.passed and decomposition.passed
    return result


_RUNNERS = {
    Command.GROUP: run_group,
    Command.GRADE: run_grade,
    Command.INVOLUTION: run_involution,
    Command.FALSIFY: run_falsify,
    Command.VERIFY: run_verify,
    Command.STRUCTURE: run_structure,
}


def run(config: RunConfig, parts: int = 1) -> ClaimResult:
    """Run one configured check.

    Raises:
        ConfigError: If the config is incomplete or inconsistent
        ClaimError: If an inner operation fails, tagged with the claim being checked
    """
    label = _claim_name(config.claim) or config.command.value
    try:
        if config.command == Command.ENUMERATE:
            return run_enumerate(config, parts)
        return _RUNNERS[config.command](config)
    except ConfigError:
        raise
    except SupergradeError as e:
        logger.error(f"{label} failed: {e}")
        raise ClaimError(label, e) from e


# ========== Output ==========

def render_text(report: Report) -> str:
    lines = [
        f"claim: {report.claim}",
        f"instance: {report.instance}",
        f"verdict: {report.verdict.value}",
        f"evidence: {report.evidence_kind.value}",
    ]
    if report.family_size is not None:
        lines.append(f"family_size: {report.family_size}")
    if report.timing_ms is not None:
        lines.append(f"timing_ms: {report.timing_ms:.1f}")
    for key in sorted(report.details):
        lines.append(f"  {key}: {report.details[key]}")
    if report.witnesses:
        lines.append(f"witnesses: {len(report.witnesses)}")
        for w in report.witnesses[:10]:
            lines.append(f"  - {w}")
    return "\n".join(lines) + "\n"


def emit(report: Report, fmt: OutputFormat, include_timing: bool = False) -> str:
    if fmt == OutputFormat.TEXT:
        return render_text(report)
    return encode_report(report, include_timing).decode("utf-8")


# ========== Archive ==========

REPORTS_COMMAND = "reports"


def golden_key(config: RunConfig) -> str:
    """Golden-count entry name, e.g. Z2_osp_2_2."""
    sig = SuperSignature.parse(config.sig)
    return f"{_group(config).render()}_{config.inv or 'osp'}_{sig.n}_{sig.m}"


async def archive_report(out: str, report: Report, config: RunConfig, include_timing: bool = False) -> Path:
    """Save the report; a passing enumeration also records its counts as golden."""
    store = ReportStore(out)
    path = await store.save_report(report, include_timing)
    if config.command == Command.ENUMERATE and report.verdict == Verdict.PASS:
        counts = {"raw": report.details["raw_count"], "dedup": report.details["dedup_count"]}
        await store.record_golden(golden_key(config), counts)
    return path


def run_reports(args: argparse.Namespace) -> int:
    """Print archived report keys, one archived report, or the golden counts.

    A shown report exits 0 or 1 by its archived verdict; a missing report exits 2.
    """
    store = ReportStore(args.out)
    claim = _claim_name(args.claim)
    try:
        if args.golden:
            sys.stdout.write(encode_json(asyncio.run(store.load_golden())).decode("utf-8"))
            return 0
        if args.instance is not None:
            if claim is None:
                raise ConfigSemanticError("reports --instance needs --claim")
            report = asyncio.run(store.load_report(claim, args.instance))
            sys.stdout.write(emit(report, OutputFormat(args.format), report.timing_ms is not None))
            return 0 if report.verdict == Verdict.PASS else 1
        sys.stdout.write(encode_json(asyncio.run(store.list_reports(claim))).decode("utf-8"))
        return 0
    except (ConfigError, StorageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


# ========== Entry point ==========

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="Read key=value settings from a file")
    common.add_argument("--out", type=str, help="Archive the report under this directory")
    common.add_argument("--verbose", action="store_true", help="Debug logging on stderr")
    common.add_argument("--timing", action="store_true", help="Include timing_ms in the report")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], help="Output format (default: json)")
    for key in ("group", "sig", "theta", "inv", "p", "q", "h", "elements", "perm", "embedding", "kind", "claim"):
        common.add_argument(f"--{key}", type=str)
    for key in ("k", "n", "m"):
        common.add_argument(f"--{key}", type=int)
    common.add_argument("--fine-k", dest="fine_k", type=int)

    parser = argparse.ArgumentParser(prog="supergrade", description="Exact gradings and superinvolutions")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in Command:
        p = sub.add_parser(command.value, parents=[common])
        if command == Command.ENUMERATE:
            p.add_argument("--parts", type=int, default=1, help="Split the scan into disjoint ranges")
        if command in (Command.FALSIFY, Command.VERIFY):
            p.add_argument("--lemma", type=str, help="Lemma number, e.g. 5.1")
            p.add_argument("--thm", type=str, help="Theorem number, e.g. 5.3")
            p.add_argument("--spec", type=str, help="Claim to check, e.g. Lemma5.1 or 5.1")

    archive = sub.add_parser(REPORTS_COMMAND, help="Read an archive written with --out")
    archive.add_argument("--out", type=str, required=True, help="Archive directory")
    archive.add_argument("--claim", type=str, help="Restrict to one claim, e.g. Thm5.2 or 5.2")
    archive.add_argument("--instance", type=str, help="Show the report archived for this instance")
    archive.add_argument("--golden", action="store_true", help="Show the recorded golden enumeration counts")
    archive.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.JSON.value,
                         help="Rendering of a shown report")
    archive.add_argument("--verbose", action="store_true", help="Debug logging on stderr")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Merge --config file values with explicit flags (flags win) and apply env bounds.

    Raises:
        ConfigError: On unreadable files or invalid values
    """
    values: dict[str, Any] = {}
    if args.config:
        values = load_config_file(args.config).model_dump(exclude_none=True)
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            values[key] = value
    for flag in ("spec", "lemma", "thm"):
        value = getattr(args, flag, None)
        if value is not None:
            values["claim"] = _claim_name(value)
    values["command"] = args.command
    try:
        config = RunConfig(**values)
    except ValidationError as e:
        raise ConfigSemanticError(f"invalid config: {e.errors()[0]['msg']}") from e
    is_valid, errors = ConfigValidator.validate_config(config)
    if not is_valid:
        raise ConfigSemanticError("; ".join(errors))
    if config.bounds == Bounds():
        config.bounds = bounds_from_env()
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == REPORTS_COMMAND:
        return run_reports(args)
    try:
        config = config_from_args(args)
        start = time.perf_counter()
        result = run(config, getattr(args, "parts", 1))
        elapsed = (time.perf_counter() - start) * 1000
    except (ConfigError, ClaimError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    report = Report.from_result(result, elapsed if args.timing else None)
    sys.stdout.write(emit(report, config.format, args.timing))
    if args.out:
        path = asyncio.run(archive_report(args.out, report, config, args.timing))
        logger.info(f"Report archived at {path}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
