"""
Report service: run manifests and deterministic report documents.
"""
import json
import logging
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from .base_service import BaseService
from src.config.config import TOOL_NAME, TOOL_VERSION
from src.models.inference import TestReport
from src.models.protocol import BRANCH_LABELS
from src.utils.exceptions import InvalidConfig, IoFailure, SchemaViolation
from src.utils.file_manager import dumps_json

logger = logging.getLogger(__name__)

FORMATS = ('text', 'json')
FREQUENCY_NAMES = ('nu(a+|b+)', 'nu(c+|b-)', 'nu(a+|c+)')


class RunManifest(BaseModel):
    """What is needed to rerun a command and get the same bytes."""

    model_config = ConfigDict(frozen=True)

    command: str
    arguments: Dict[str, Any] = Field(default_factory=dict)
    config: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    tool_version: str = f"{TOOL_NAME} {TOOL_VERSION}"
    input_digests: Dict[str, str] = Field(default_factory=dict)
    timestamps: Dict[str, str] = Field(default_factory=dict)


def manifest_timestamp() -> str:
    """UTC creation time; SOURCE_DATE_EPOCH pins it for reproducible builds."""
    epoch = os.getenv('SOURCE_DATE_EPOCH')
    if epoch:
        try:
            moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
        except ValueError:
            raise InvalidConfig(f"SOURCE_DATE_EPOCH must be an integer, got {epoch!r}") from None
    else:
        moment = datetime.now(timezone.utc).replace(microsecond=0)
    return moment.isoformat()


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def _render_analyze(report: Dict[str, Any]) -> list:
    freq = report['frequencies']
    cfg = report['config']
    lines = [f"verdict: {report['verdict'].upper()}",
             f"method: {report['method']}",
             f"delta_hat: {_fmt(report['delta_hat'])} (std error {_fmt(report['std_error'])}, "
             f"{report['interval_method']} interval)",
             f"statistic: {report['statistic']:.6g}  p_value: {report['p_value']:.6g}  alpha: {cfg['alpha']}"]
    for name, k, n in zip(FREQUENCY_NAMES, freq['numerators'], freq['denominators']):
        lines.append(f"{name} = {k}/{n} = {_fmt(k / n)}")
    homogeneity = report.get('homogeneity')
    if homogeneity:
        state = 'pass' if homogeneity['passed'] else 'FAIL'
        lines.append(f"homogeneity: {state} (chi2 {homogeneity['chi2']:.4f}, "
                     f"critical {homogeneity['critical_value']:.4f}, dof {homogeneity['dof']})")
    else:
        lines.append("homogeneity: not checked")
    lines.append(_realizability_line(report['realizability']))
    exceeds = 'yes' if report['exceeds_threshold'] else 'no'
    lines.append(f"delta >= {cfg['delta_threshold']} at confidence {cfg['confidence']}: {exceeds} "
                 f"(lower bound {_fmt(report['lower_bound'])})")
    if report.get('fitted_triple'):
        fitted = report['fitted_triple']
        lines.append("closest realizable triple: (" + ", ".join(
            _fmt(fitted[key]) for key in ('p_a_given_b_plus', 'p_c_given_b_minus', 'p_a_given_c_plus')) + ")")
    return lines


def _realizability_line(verdict: Dict[str, Any]) -> str:
    if verdict['feasible']:
        atoms = ", ".join(_fmt(v) for v in verdict['witness']['atoms'])
        return f"realizability: feasible (witness [{atoms}])"
    return f"realizability: infeasible (max_violation {verdict['max_violation']:.6g})"


def _triple_text(triple: Dict[str, float]) -> str:
    return "(" + ", ".join(_fmt(triple[key]) for key in
                           ('p_a_given_b_plus', 'p_c_given_b_minus', 'p_a_given_c_plus')) + ")"


def _render_exact(payload: Dict[str, Any]) -> list:
    state = 'VIOLATED' if payload['violated'] else 'holds'
    lines = [f"model: {payload['model']['kind']}",
             f"conditionals (a+|b+, c+|b-, a+|c+): {_triple_text(payload['triple'])}",
             f"delta: {_fmt(payload['delta'])}",
             f"inequality {state}",
             "marginals: (" + ", ".join(_fmt(p) for p in payload['marginals']) + ")"]
    if not payload['symmetric_marginals']:
        lines.append("warning: marginals are not all 1/2; the inequality's premise fails")
    return lines


def _render_simulate(payload: Dict[str, Any]) -> list:
    result = payload['result']
    lines = [f"n_total: {result['n_total']}  seed: {result['seed']}",
             f"U: {result['n_U']} (b+ {result['U_b_plus']}, b- {result['U_b_minus']})",
             f"V: {result['n_V']} (c+ {result['V_c_plus']}, c- {result['V_c_minus']})"]
    counts = (result['a_plus_given_b_plus'], result['c_plus_given_b_minus'], result['a_plus_given_c_plus'])
    sizes = (result['U_b_plus'], result['U_b_minus'], result['V_c_plus'])
    for name, label, k, n in zip(FREQUENCY_NAMES, BRANCH_LABELS, counts, sizes):
        lines.append(f"{name} = {k}/{n} ({label})")
    for key in ('out', 'csv'):
        if payload.get(key):
            lines.append(f"{key}: {payload[key]}")
    return lines


def _render_realizable(payload: Dict[str, Any]) -> list:
    return [f"triple: {_triple_text(payload['triple'])}",
            f"delta: {_fmt(payload['delta'])}",
            _realizability_line(payload['verdict'])]


def _render_maximize(payload: Dict[str, Any]) -> list:
    return [f"theta_a: {_fmt(payload['theta_a']['theta'])}",
            f"theta_b: {_fmt(payload['theta_b']['theta'])}",
            f"theta_c: {_fmt(payload['theta_c']['theta'])}",
            f"delta_max: {payload['delta_max']:.12f} (grid {payload['grid_delta_max']:.12f}, "
            f"step {payload['grid_step']}, {payload['refine_iterations']} refinements)"]


def _render_power(payload: Dict[str, Any]) -> list:
    lines = [f"n per branch: {payload['n_per_branch']}",
             f"analytic n: {payload['analytic_n']:.4f}",
             f"target delta: {payload['target_delta']}  alpha: {payload['alpha']}  power: {payload['power']}",
             f"target triple: {_triple_text(payload['triple'])}"]
    if payload.get('monte_carlo_power') is not None:
        lines.append(f"monte carlo power: {payload['monte_carlo_power']:.4f}")
    if payload['boundary']:
        lines.append("warning: boundary triple, variance vanishes")
    if payload['degenerate']:
        lines.append("warning: degenerate configuration, alpha and power need no data")
    return lines


RENDERERS: Dict[str, Callable[[Dict[str, Any]], list]] = {
    'analyze': _render_analyze,
    'exact': _render_exact,
    'simulate': _render_simulate,
    'realizable': _render_realizable,
    'maximize': _render_maximize,
    'power': _render_power,
}


class ReportService(BaseService):
    """Service for building manifests and writing report documents."""

    def build_manifest(self, command: str, arguments: Optional[Dict[str, Any]] = None,
                       seed: Optional[int] = None,
                       inputs: Iterable[Union[str, Path]] = ()) -> RunManifest:
        """
        Manifest for one command invocation.

        Args:
            command: Subcommand name
            arguments: Effective flag values
            seed: Seed used by the command, if any
            inputs: Files read by the command; each is recorded by sha256

        Returns:
            RunManifest: Manifest to embed in the report
        """
        digests = {str(path): self.file_manager.digest(path) for path in inputs}
        return RunManifest(command=command, arguments=dict(arguments or {}),
                           config=self.config.snapshot(), seed=seed, input_digests=digests,
                           timestamps={'created': manifest_timestamp()})

    def render(self, command: str, payload: Union[BaseModel, Dict[str, Any]],
               manifest: RunManifest, format: Optional[str] = None) -> str:
        """
        Serialize a command's output.

        JSON documents hold {"manifest", "report"} with sorted keys; text
        documents hold the command's summary lines followed by the manifest line.
        """
        format = self.setting('report_format', format)
        if format not in FORMATS:
            raise InvalidConfig(f"format must be text or json, got {format!r}")
        data = payload.model_dump(mode='json') if isinstance(payload, BaseModel) else payload
        if format == 'json':
            return dumps_json({'manifest': manifest.model_dump(mode='json'), 'report': data})

        lines = [f"{TOOL_NAME} {command}"]
        lines.extend(RENDERERS[command](data))
        seed = 'none' if manifest.seed is None else manifest.seed
        lines.append(f"manifest: {manifest.tool_version}, seed {seed}, "
                     f"created {manifest.timestamps.get('created', 'unknown')}")
        return "\n".join(lines) + "\n"

    def write_report(self, report: TestReport, manifest: RunManifest, format: Optional[str] = None) -> str:
        """Analysis report as a JSON or text document."""
        return self.render('analyze', report, manifest, format)

    def read_report(self, document: str) -> Tuple[TestReport, RunManifest]:
        """Inverse of write_report for JSON documents."""
        try:
            data = json.loads(document)
        except json.JSONDecodeError as e:
            raise IoFailure(f"report is not valid JSON: {e.msg} at line {e.lineno}") from e
        if not isinstance(data, dict) or not {'manifest', 'report'} <= data.keys():
            raise SchemaViolation("report document needs 'manifest' and 'report' entries")
        return TestReport.model_validate(data['report']), RunManifest.model_validate(data['manifest'])

    def save(self, document: str, filename: Union[str, Path]) -> Path:
        """Write a rendered document, bare names going to the reports directory."""
        return self.file_manager.save_text(document, filename, category='reports')
