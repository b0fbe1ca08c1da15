# src/analysis/report.py

import json
from datetime import datetime
from typing import Any, Dict, List, Optional, Union

import pandas as pd
from pydantic import BaseModel, Field

from src.utils.errors import IoFailure

SCHEMA_VERSION = "1.0"
NO_VIOLATIONS = "none"


class Report(BaseModel):
    """
    Machine report of one command run. `violations` is either the literal "none" or a
    nonempty list of messages; `notes` carries data worth flagging that is not a
    violation (catalog-mode exceptions, skipped indices).
    """
    schema_version: str = SCHEMA_VERSION
    command: str
    config: Dict[str, Any] = {}
    payload: Dict[str, Any] = {}
    wall_time_seconds: float = 0.0
    violations: Union[str, List[str]] = NO_VIOLATIONS
    notes: List[str] = []
    generated: str = Field(default_factory=lambda: datetime.now().strftime("%Y-%m-%d %H:%M:%S"))

    @property
    def clean(self) -> bool:
        return self.violations == NO_VIOLATIONS

    @property
    def exit_code(self) -> int:
        return 0 if self.clean else 1


def make_report(command: str, config: Dict[str, Any], payload: Dict[str, Any], violations: List[str],
                wall_time: float, notes: Optional[List[str]] = None) -> Report:
    return Report(command=command, config=config, payload=payload, wall_time_seconds=round(wall_time, 6),
                  violations=list(violations) if violations else NO_VIOLATIONS, notes=notes or [])


def summarize(report: Report) -> str:
    lines = [f"[{report.command}] finished in {report.wall_time_seconds:.3f}s"]
    for key, value in report.payload.items():
        if isinstance(value, (bool, int, float, str)) or value is None:
            lines.append(f"  {key}: {value}")
    for note in report.notes:
        lines.append(f"  note: {note}")
    if report.clean:
        lines.append("  violations: none")
    else:
        lines.append(f"  violations ({len(report.violations)}):")
        lines.extend(f"    - {v}" for v in report.violations)
    return "\n".join(lines)


def render_html(report: Report, tables: Optional[Dict[str, pd.DataFrame]] = None) -> str:
    """
    Bootstrap-styled HTML summary: scalar payload fields, violations, notes and the
    first rows of every table.
    """
    scalars = {k: v for k, v in report.payload.items()
               if isinstance(v, (bool, int, float, str)) or v is None}
    status = "text-success" if report.clean else "text-danger"
    violations = ["none"] if report.clean else report.violations
    table_cards = "".join(
        f"""
      <div class="card shadow-sm">
        <div class="card-body">
          <h4 class="card-title">{name} ({len(df)} rows)</h4>
          <div class="table-responsive">
            {df.head(50).to_html(classes="table table-bordered table-sm", index=False, border=0)}
          </div>
        </div>
      </div>"""
        for name, df in (tables or {}).items()
    )

    html = f"""
    <!DOCTYPE html>
    <html lang="en">
    <head>
      <meta charset="UTF-8">
      <title>Rigidity Lab Report: {report.command}</title>
      <link href="https://cdn.jsdelivr.net/npm/bootstrap@5.3.2/dist/css/bootstrap.min.css" rel="stylesheet">
      <style>
        body {{ background: #f9fafb; }}
        .container {{ margin-top: 40px; }}
        .table-responsive {{ font-size: 0.98rem; }}
        .card {{ margin-bottom: 24px; }}
      </style>
    </head>
    <body>
    <div class="container">
      <div class="card shadow-sm">
        <div class="card-body">
          <h2 class="card-title text-primary mb-3">Rigidity Lab Report: {report.command}</h2>
          <div class="mb-2 text-muted">Generated: {report.generated} (schema {report.schema_version})</div>
          <div><b>Wall time:</b> {report.wall_time_seconds:.3f}s</div>
        </div>
      </div>
      <div class="card shadow-sm">
        <div class="card-body">
          <h4 class="card-title">Summary</h4>
          <ul>
            {"".join([f"<li><b>{k}:</b> {v}</li>" for k, v in scalars.items()])}
          </ul>
        </div>
      </div>
      <div class="card shadow-sm">
        <div class="card-body">
          <h4 class="card-title {status}">Violations</h4>
          <ul>
            {"".join([f"<li>{v}</li>" for v in violations])}
          </ul>
          {"".join([f"<div class='text-muted'>{n}</div>" for n in report.notes])}
        </div>
      </div>{table_cards}
      <div class="text-center text-secondary mb-4">End of Report</div>
    </div>
    </body>
    </html>
    """
    return html


def _write_text(path: str, text: str):
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as exc:
        raise IoFailure(f"could not write {path}: {exc}") from exc


def emit_report(report: Report, path: str, html_path: Optional[str] = None,
                tables: Optional[Dict[str, pd.DataFrame]] = None, csv_path: Optional[str] = None,
                logger=None, echo: bool = True) -> int:
    """
    Write the JSON report to `path`, print the summary, optionally write HTML and the
    first table as CSV. Returns the exit status: 0 iff there are no violations.
    """
    _write_text(path, report.model_dump_json(indent=2))
    if logger:
        logger.info(f"JSON report saved at {path}")
    if echo:
        print(summarize(report))

    if html_path:
        _write_text(html_path, render_html(report, tables))
        if logger:
            logger.info(f"HTML report saved at {html_path}")

    if csv_path and tables:
        name, df = next(iter(tables.items()))
        try:
            df.to_csv(csv_path, index=False)
        except OSError as exc:
            raise IoFailure(f"could not write {csv_path}: {exc}") from exc
        if logger:
            logger.info(f"Table '{name}' saved at {csv_path}")
    return report.exit_code


def load_report(path: str) -> Report:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise IoFailure(f"could not read {path}: {exc}") from exc
    return Report.model_validate(data)
