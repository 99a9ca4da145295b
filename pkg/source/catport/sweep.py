"""
Parameter sweeps over (|alpha|^2, theta, phi) and the tables written from them.

Every grid point is evaluated exhaustively: the full outcome tree, the exact
average fidelity, the closed forms and the formula flags. Rows come back in
grid order whatever the number of workers.
"""

import logging
import logging.handlers
import math
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import pandas as pd

from . import analytic_formulas
from .catport_error import OutputError
from .fock_state import TruncationPolicy
from .formula_flags import FlagLedger, collect_formula_flags
from .protocol_tree import evaluate_protocol
from .teleport_protocol import CASE_IDS, CASES, alice_stage, build_channel, make_information

logger = logging.getLogger(__name__)

SIGN_CASES = {"minus": "ii", "plus": "iv"}
SITUATION_COLUMNS = {"a": "A", "b": "B", "cl": "C_l", "cu": "C_u"}

GRID_COLUMNS = ["alpha_sq", "theta", "phi"]
FIGURES = {
    "fig1_concurrence": ["alpha_sq", "concurrence"],
    "fig2_case_i_prob": GRID_COLUMNS + ["p_case_i"],
    "fig3_branch_probs": GRID_COLUMNS + ["p_plus", "p_minus"],
    "fig5_vnm_probs": GRID_COLUMNS
    + ["p_l_minus", "p_u_minus", "p_l_plus", "p_u_plus", "p_l_minus_joint", "p_u_minus_joint", "p_l_plus_joint", "p_u_plus_joint"],
    "fig6_fidelity_A": GRID_COLUMNS + ["f_a_minus", "f_a_plus"],
    "fig7_fidelity_Cl": GRID_COLUMNS + ["f_cl_minus", "f_cl_plus"],
    "fig8_avg_fidelity": GRID_COLUMNS + ["f_avg_exact", "f_avg_sums", "f_avg_expansion", "f_avg_asymptotic"],
}

BRANCH_TABLE_COLUMNS = ["case", "detector_mode3", "detector_mode4", "probability", "bob_state", "phase_shift", "mixing_cat", "bs2_output"]


@dataclass
class PointResult:
    row: dict
    flags: list = field(default_factory=list)


def _finite(value):
    """Float, or None for anything missing or non-finite."""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def _sign_columns(tree, sign):
    case_id = SIGN_CASES[sign]
    branch = tree.branch(case_id)
    columns = {}
    p_l, p_u = tree.vnm_probabilities(case_id) if case_id in tree.cavity else (None, None)
    columns[f"p_l_{sign}"] = p_l
    columns[f"p_u_{sign}"] = p_u
    columns[f"p_l_{sign}_joint"] = None if p_l is None else branch.probability * p_l
    columns[f"p_u_{sign}_joint"] = None if p_u is None else branch.probability * p_u
    for key, situation in SITUATION_COLUMNS.items():
        present = case_id in tree.cavity
        columns[f"p_{key}_{sign}"] = tree.situation_probability(case_id, situation) if present else None
        columns[f"f_{key}_{sign}"] = tree.situation_fidelity(case_id, situation) if present else None
    return columns


def evaluate_point(alpha_sq, theta, phi, truncation_tail=1e-12):
    """Row of the sweep table and the formula flags for one grid point."""
    info = make_information(math.sqrt(alpha_sq), theta=theta, phi=phi)
    policy = TruncationPolicy.for_mean(alpha_sq, truncation_tail)
    tree = evaluate_protocol(info, policy)
    terms = analytic_formulas.exact_sums(info, tree.params, policy)
    f_avg = analytic_formulas.avg_fidelity_exact(tree)
    sums, expansion, asymptotic = analytic_formulas.avg_fidelity_closed_form(info, terms)
    flags = collect_formula_flags(tree, terms, f_avg)

    row = {"alpha_sq": alpha_sq, "theta": theta, "phi": phi}
    row["concurrence"] = tree.concurrence
    row["concurrence_closed_form"] = analytic_formulas.channel_concurrence(info.x)
    for case_id in CASE_IDS:
        row[f"p_case_{case_id}"] = tree.branch(case_id).probability
    row["p_minus"] = row["p_case_ii"]
    row["p_plus"] = row["p_case_iv"]
    row["p_case_i_closed_form"] = analytic_formulas.case_i_probability(info)
    row["p_minus_closed_form"] = analytic_formulas.branch_probability(info, "minus")
    row["p_plus_closed_form"] = analytic_formulas.branch_probability(info, "plus")
    row["f_case_i"] = tree.case_i.simulated
    row["f_case_i_closed_form"] = tree.case_i.closed_form
    for sign in SIGN_CASES:
        row.update(_sign_columns(tree, sign))
    row["leaf_total"] = tree.total_probability()
    row["f_avg_exact"] = f_avg
    row["f_avg_rearranged"] = analytic_formulas.average_fidelity_rearranged(info, terms)
    row["f_avg_sums"] = sums
    row["f_avg_expansion"] = expansion
    row["f_avg_asymptotic"] = asymptotic
    row["p_i0"] = info.P_I0
    row["s1"] = terms.S1
    row["s2"] = terms.S2
    row["s3_abs"] = abs(terms.S3)
    row = {key: value if key in GRID_COLUMNS else _finite(value) for key, value in row.items()}
    row["formula_flags"] = ";".join(sorted({flag.key for flag in flags}))

    logger.info(f"{info.describe()}: F_avg {f_avg:.6f}, {len(flags)} formula flags")
    return PointResult(row, flags)


def _forward_worker_logs(queue, level):
    """Route every record of a worker process to the parent through queue."""
    root = logging.getLogger()
    root.handlers = [logging.handlers.QueueHandler(queue)]
    root.setLevel(level)


def _evaluate_grid_point(args):
    alpha_sq, theta, phi, truncation_tail = args
    return evaluate_point(alpha_sq, theta, phi, truncation_tail)


def run_sweep(config):
    """Evaluate every grid point of the config; returns (DataFrame, FlagLedger)."""
    config.validate()
    jobs = [(a, t, p, config.truncation_tail) for a, t, p in config.grid()]
    logger.info(f"sweeping {len(jobs)} grid points with {config.workers} worker(s)")
    if config.workers > 1:
        root = logging.getLogger()
        with multiprocessing.Manager() as manager:
            queue = manager.Queue()
            listener = logging.handlers.QueueListener(queue, *root.handlers, respect_handler_level=True)
            listener.start()
            try:
                with ProcessPoolExecutor(
                    max_workers=config.workers, initializer=_forward_worker_logs, initargs=(queue, root.getEffectiveLevel())
                ) as executor:
                    results = list(executor.map(_evaluate_grid_point, jobs))
            finally:
                listener.stop()
    else:
        results = [_evaluate_grid_point(job) for job in jobs]

    ledger = FlagLedger()
    for result in results:
        ledger.add(result.flags)
    frame = pd.DataFrame([result.row for result in results])
    return frame, ledger


def figure_tables(frame):
    """One DataFrame per figure, selected from the sweep table."""
    tables = {}
    for name, columns in FIGURES.items():
        table = frame[columns]
        if name == "fig1_concurrence":
            table = table.drop_duplicates(subset="alpha_sq")
        tables[name] = table.reset_index(drop=True)
    return tables


def write_table(frame, directory, name, fmt="csv"):
    path = os.path.join(directory, f"{name}.{fmt}")
    try:
        os.makedirs(directory, exist_ok=True)
        if fmt == "csv":
            frame.to_csv(path, index=False, float_format="%.12g")
        else:
            frame.to_json(path, orient="records", indent=2, double_precision=15)
    except OSError as e:
        raise OutputError(f"cannot write {path}", e)
    logger.info(f"wrote {len(frame)} rows to {path}")
    return path


def write_figures(frame, directory, fmt="csv"):
    return [write_table(table, directory, name, fmt) for name, table in figure_tables(frame).items()]


def _describe_bob_state(branch):
    """Bob's collapsed mode-2 state written on the labels +/- alpha/sqrt2."""
    if branch.bob_mode2_state is None:
        return "none"
    unit = branch.info.alpha / math.sqrt(2.0)
    parts = []
    for coeff, (label,) in branch.bob_mode2_state.terms:
        ratio = (label / unit).real
        ket = "|0>" if abs(ratio) < 1e-12 else f"|{'+' if ratio > 0 else '-'}alpha/sqrt2>"
        parts.append(f"({coeff.real:+.6g}{coeff.imag:+.6g}j){ket}")
    return " ".join(parts)


def branch_table(alpha_sq, theta, phi=0.0):
    """The five photon-counting branches at one point, one row each."""
    info = make_information(math.sqrt(alpha_sq), theta=theta, phi=phi)
    rows = []
    for branch in alice_stage(info, build_channel(info.alpha)):
        outcome, cps, mixing = CASES[branch.case_id]
        sign = branch.sign
        rows.append(
            {
                "case": branch.case_id,
                "detector_mode3": outcome[0],
                "detector_mode4": outcome[1],
                "probability": branch.probability,
                "bob_state": _describe_bob_state(branch),
                "phase_shift": cps,
                "mixing_cat": mixing,
                "bs2_output": "none" if sign is None else ("|I,0> - |0,I>" if sign == "minus" else "|I,0> + |0,I>"),
            }
        )
    return pd.DataFrame(rows, columns=BRANCH_TABLE_COLUMNS)
