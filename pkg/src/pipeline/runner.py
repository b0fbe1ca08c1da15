# src/pipeline/runner.py

"""
Dispatch one validated ExperimentConfig to the lab modules and wrap the result in a
Report together with the tables worth exporting.
"""

import datetime
import os
import time
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.analysis.report import Report, make_report
from src.charsum.audit import FAIL, audit_field_coverage, audits_frame, rou_exhaustive, run_audit_batch
from src.clique.clique import export_edge_list, make_instance, verify_thm_main2
from src.config.models import ExperimentConfig
from src.directions.directions import (LinearizedMap, directions_of_additive, directions_of_function,
                                       is_additive, is_frobenius_linear, triple_quotient_size)
from src.field.field_core import build_field
from src.field.mult_structure import make_coset_union, psi_audit
from src.rigidity.example import reproduce_f25_example
from src.rigidity.search import (find_exceptional_examples, run_directions_bruteforce, scan_bound_margin,
                                 verify_thm_main)
from src.utils.errors import InvalidValue
from src.utils.logger import get_logger

Tables = Dict[str, pd.DataFrame]
Result = Tuple[Dict, List[str], List[str], Tables]


def prepare_paths(config: ExperimentConfig, now: Optional[datetime.datetime] = None) -> Dict[str, str]:
    """Timestamped logs/YYYYMMDD and output/YYYYMMDD locations for one run."""
    now = now or datetime.datetime.now()
    date_str = now.strftime("%Y%m%d")
    hour_str = now.strftime("%H%M%S")
    logs_path = os.path.join(config.base_logdir, date_str)
    report_dir = os.path.join(config.output_dir, date_str)
    os.makedirs(logs_path, exist_ok=True)
    os.makedirs(report_dir, exist_ok=True)
    stem = f"report_{config.command}_{date_str}_{hour_str}"
    return {
        "log_file": os.path.join(logs_path, f"main_{date_str}_{hour_str}.log"),
        "json": config.out or os.path.join(report_dir, f"{stem}.json"),
        "html": os.path.join(report_dir, f"{stem}.html") if config.html else None,
        "csv": config.csv,
    }


def _require(config: ExperimentConfig, *keys: str):
    for key in keys:
        if getattr(config, key) is None:
            raise InvalidValue(key, f"required by the {config.command} command")


# ---------------------------------------------------------------- commands
def _field_info(config: ExperimentConfig, log) -> Result:
    _require(config, "p")
    field = build_field(config.p, config.n, config.field_cap)
    xs = field.nonzero()
    roundtrip = bool(np.array_equal(field.exp_table[field.log_table[xs]], xs))
    payload = {
        **field.to_dict(),
        "order": field.q - 1,
        "modulus_str": " + ".join(f"{c}*t^{i}" for i, c in enumerate(field.modulus) if c),
        "subfield_degrees": [e for e in range(1, field.n + 1) if field.n % e == 0],
        "log_exp_roundtrip": roundtrip,
    }
    table = pd.DataFrame({"k": np.arange(field.q - 1), "g_pow_k": field.exp_table})
    log(f"F_{field.q}: modulus {list(field.modulus)}, primitive root {field.g}")
    violations = [] if roundtrip else ["exp/log tables are not inverse to each other"]
    return payload, violations, [], {"exp_table": table}


def _directions(config: ExperimentConfig, log) -> Result:
    _require(config, "p")
    field = build_field(config.p, config.n, config.field_cap)
    if config.coeffs:
        L = LinearizedMap.of(field, config.coeffs)
        table = L.table()
        dirs = directions_of_additive(L)
    elif config.table:
        if len(config.table) != field.q:
            raise InvalidValue("table", f"expected {field.q} values, got {len(config.table)}")
        table = np.array([field.enc(v) for v in config.table], dtype=np.int64)
        dirs = directions_of_function(field, table)
    else:
        raise InvalidValue("coeffs", "give coeffs (a linearized map) or table (a value table)")
    witness = is_frobenius_linear(field, table)
    payload = {
        "field": field.to_dict(),
        "table": table.tolist(),
        "directions": dirs.slopes(),
        "direction_count": len(dirs),
        "direction_bound_ok": 2 * len(dirs) <= field.q + 1,
        "additive": is_additive(field, table),
        "frobenius_witness": list(witness) if witness else None,
    }
    if config.d is not None:
        D = make_coset_union(field, config.d, config.cosets)
        payload.update({"d": D.d, "M": list(D.M), "directions_in_D": dirs.issubset(D),
                        "triple_quotient_size": triple_quotient_size(D)})
    log(f"Directions over F_{field.q}: {len(dirs)} slopes")
    return payload, [], [], {}


def _rigidity(config: ExperimentConfig, log) -> Result:
    _require(config, "p", "d")
    report = verify_thm_main(config.p, config.n, config.d, config.cosets, jobs=config.jobs,
                             field_cap=config.field_cap, search_cap=config.search_cap)
    notes = []
    if not report.p_bound and report.exceptional_count:
        notes.append(f"{report.exceptional_count} exceptional survivors below the p-bound (data, not violations)")
    survivors = pd.DataFrame([s.model_dump() for s in report.survivors])
    log(f"Rigidity: {report.survivor_count} survivors, {report.exceptional_count} exceptional")
    return report.model_dump(mode="json"), list(report.violations), notes, {"survivors": survivors}


def _directions_theorem(config: ExperimentConfig, log) -> Result:
    q = config.q
    if q is None:
        _require(config, "p")
        q = config.p ** config.n
    report = run_directions_bruteforce(q, max_q=config.bruteforce_max_q)
    violations = []
    if report.violations:
        violations.append(f"THEOREM VIOLATION: {report.violations} non-additive functions with few directions")
        violations.extend(f"  counterexample table: {e}" for e in report.examples)
    log(f"Brute force over F_{q}: {report.small_direction_count} functions with few directions")
    return report.model_dump(mode="json"), violations, [], {}


def _exceptional(config: ExperimentConfig, log) -> Result:
    if config.primes:
        _require(config, "d")
        scan = scan_bound_margin(config.n, config.d, config.r_max, config.primes, field_cap=config.field_cap)
        violations = [f"THEOREM VIOLATION: exceptional example at p={p} above the threshold"
                      for p in scan.exceptions_above_threshold]
        frame = pd.DataFrame({"p": list(map(int, scan.example_counts)),
                              "examples": list(scan.example_counts.values())})
        log(f"Bound margin scan: exceptions at {scan.primes_with_exceptions}")
        return scan.model_dump(mode="json"), violations, [], {"bound_margin": frame}
    _require(config, "p")
    d_range = config.d_range or ([config.d] if config.d else [])
    if not d_range:
        raise InvalidValue("d_range", "give d_range or d")
    examples = find_exceptional_examples(config.p, config.n, d_range, config.r_max,
                                         field_cap=config.field_cap, search_cap=config.search_cap)
    rows = [e.to_dict() for e in examples]
    payload = {"p": config.p, "n": config.n, "d_range": d_range, "r_max": config.r_max,
               "example_count": len(rows), "examples": rows}
    notes = [f"{len(rows)} exceptional examples catalogued"] if rows else []
    log(f"Exceptional search: {len(rows)} examples")
    return payload, [], notes, {"examples": pd.DataFrame(rows)}


def _charsum(config: ExperimentConfig, log) -> Result:
    mode = config.audit_mode()
    if mode == "psi":
        _require(config, "p", "d")
        field = build_field(config.p, config.n, config.field_cap)
        D = make_coset_union(field, config.d, config.cosets)
        frame = psi_audit(D)
        bad = frame.loc[~frame["agrees"], "x"].tolist()
        payload = {"mode": mode, "field": field.to_dict(), "d": D.d, "M": list(D.M),
                   "rows": len(frame), "disagreements": len(bad)}
        violations = [f"psi indicator disagrees with membership at x={x}" for x in bad]
        return payload, violations, [], {"psi": frame}
    audits = run_audit_batch(mode, config.count, config.seed, cap=config.audit_field_cap,
                             exact=config.exact, rou_max_d=config.rou_max_d)
    frame = audits_frame(audits)
    failed = [a for a in audits if a.verdict == FAIL or a.exact_verdict == FAIL]
    violations = [f"BOUND VIOLATION: {a.kind} {a.params} |S|={a.abs_value:.6f} > {a.bound:.6f}" for a in failed]
    notes = []
    payload = {
        "mode": mode, "seed": config.seed, "audits": len(audits), "failed": len(failed),
        "not_applicable": sum(a.verdict == "not-applicable" for a in audits),
        "min_margin": float(frame["margin"].min()) if len(frame) else None,
    }
    if mode != "rou":
        coverage = audit_field_coverage(mode, config.audit_field_cap)
        payload["fields_sampled"] = len(coverage["sampled"])
        payload["fields_skipped"] = [f"{p}^{n}" for p, n in coverage["skipped"]]
        if coverage["skipped"]:
            notes.append(f"{len(coverage['skipped'])} fields above the audit field cap were not sampled: "
                         f"{', '.join(payload['fields_skipped'])}")
    tables = {"audits": frame}
    if mode == "rou":
        tables["rou_summary"] = rou_exhaustive(config.rou_max_d)
    log(f"Audit {mode}: {len(audits)} audits, {len(failed)} failed")
    return payload, violations, notes, tables


def _clique(config: ExperimentConfig, log) -> Result:
    _require(config, "p", "d")
    inst = make_instance(config.p, config.n, config.d, config.cosets, field_cap=config.field_cap)
    if config.edge_list:
        edges = export_edge_list(inst, config.edge_list)
        log(f"Cayley graph edge list: {edges} edges")
    report = verify_thm_main2(inst, mode=config.clique_mode(), max_q=config.clique_max_q, jobs=config.jobs)
    notes = []
    if report.mode == "catalog" and report.exceptions:
        notes.append(f"{len(report.exceptions)} cliques other than F_q (catalog mode, data)")
    frame = pd.DataFrame([{"clique": " ".join(map(str, c.clique)), "failed": ",".join(c.failed),
                           "directions": len(c.directions)} for c in report.pipeline])
    log(f"Clique search: {report.clique_count} cliques")
    return report.model_dump(mode="json"), list(report.violations), notes, {"cliques": frame}


def _example_f25(config: ExperimentConfig, log) -> Result:
    report = reproduce_f25_example()
    log(f"F_25 example directions: {report.directions_labels}")
    return report.model_dump(mode="json"), list(report.violations), [], {}


COMMAND_HANDLERS: Dict[str, Callable[[ExperimentConfig, Callable[[str], None]], Result]] = {
    "field-info": _field_info,
    "directions": _directions,
    "rigidity": _rigidity,
    "directions-theorem": _directions_theorem,
    "exceptional": _exceptional,
    "charsum": _charsum,
    "clique": _clique,
    "example-f25": _example_f25,
}


def run_experiment(config: ExperimentConfig, logger=None,
                   logger_callback: Optional[Callable[[str], None]] = None) -> Tuple[Report, Tables]:
    """Run one command; LabError subclasses propagate to the caller."""
    logger = logger or get_logger("runner")

    def log(msg):
        logger.info(msg)
        if logger_callback:
            logger_callback(msg)

    if config.command == "charsum" and config.action not in (None, "audit"):
        raise InvalidValue("action", f"charsum supports only 'audit', got {config.action!r}")
    log(f"Running {config.command} with jobs={config.jobs}")
    start = time.time()
    payload, violations, notes, tables = COMMAND_HANDLERS[config.command](config, log)
    elapsed = time.time() - start
    echo = config.model_dump(mode="json", exclude_defaults=True)
    report = make_report(config.command, echo, payload, violations, elapsed, notes)
    log(f"{config.command} finished in {elapsed:.3f}s with "
        f"{'no violations' if report.clean else f'{len(violations)} violations'}")
    return report, {name: df for name, df in tables.items() if df is not None and len(df)}
