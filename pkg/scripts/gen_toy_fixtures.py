#!/usr/bin/env python3
"""Regenerate the bundled toy-design fixtures (design spec, scripted
scenario, pipeline config, trace suite).

The expected-report fixture is NOT written here; it is frozen from the
independent reference evaluator by tests/freeze_expected_report.py so the
numbers stay oracle-derived.
"""

from __future__ import annotations

import json
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "toy"

DESIGN_SPEC = {
    "kind": "design_spec",
    "schema_version": 1,
    "id": "",
    "title": "Toy FIFO Controller",
    "body": (
        "A single-entry FIFO controller with a request/acknowledge handshake. "
        "A request (req) received while the FIFO is not full is acknowledged "
        "(ack) exactly one cycle later. A request received while full is "
        "refused and flags an error (err) on the following cycle. The full and "
        "empty status flags are never asserted together. ack is never raised "
        "without a request on the previous cycle."
    ),
    "port_table": [
        {"name": "clk", "direction": "in", "width": 1, "description": "clock"},
        {"name": "rst", "direction": "in", "width": 1, "description": "synchronous reset"},
        {"name": "req", "direction": "in", "width": 1, "description": "push request"},
        {"name": "ack", "direction": "out", "width": 1, "description": "request accepted"},
        {"name": "full", "direction": "out", "width": 1, "description": "FIFO full flag"},
        {"name": "empty", "direction": "out", "width": 1, "description": "FIFO empty flag"},
        {"name": "err", "direction": "out", "width": 1, "description": "refused request"},
    ],
    "register_map": [],
    "behavior_notes": [
        "ack is registered: it follows a granted request by one cycle.",
        "err is registered: it follows a refused request by one cycle.",
    ],
}

PLAN_DOC = {
    "sections": [
        {
            "title": "Handshake",
            "function_summary": "Requests are acknowledged one cycle later when space exists.",
            "signal_relations": [
                "`req` with `full` low is acknowledged by `ack` one cycle later",
                "`ack` is never raised without `req` on the previous cycle",
            ],
            "verification_requirements": [
                "every granted request is acknowledged with the documented latency",
                "no spurious acknowledge ever occurs",
            ],
        },
        {
            "title": "Status flags",
            "function_summary": "full and empty describe occupancy and are mutually exclusive.",
            "signal_relations": ["`full` and `empty` are never asserted together"],
            "verification_requirements": ["flag exclusivity holds on every cycle"],
        },
        {
            "title": "Error signalling",
            "function_summary": "A refused request is reported on err.",
            "signal_relations": [
                "`err` rises one cycle after `req` arrives while `full` is high"
            ],
            "verification_requirements": ["err is raised for refused requests only"],
        },
    ],
    "signal_table": [
        {"name": "req", "direction": "in", "width": 1, "description": "push request"},
        {"name": "ack", "direction": "out", "width": 1, "description": "request accepted"},
        {"name": "full", "direction": "out", "width": 1, "description": "FIFO full flag"},
        {"name": "empty", "direction": "out", "width": 1, "description": "FIFO empty flag"},
        {"name": "err", "direction": "out", "width": 1, "description": "refused request"},
    ],
}

FEATURES_DOC = {
    "features": [
        {"feature_id": "F1", "title": "Request acknowledgement",
         "description": "A request while not full is acknowledged one cycle later.",
         "category": "handshake", "signals": ["req", "ack", "full"],
         "source_section": "Handshake"},
        {"feature_id": "F2", "title": "No spurious acknowledge",
         "description": "ack only ever follows a request.",
         "category": "handshake", "signals": ["req", "ack"],
         "source_section": "Handshake"},
        {"feature_id": "F3", "title": "Flag exclusivity",
         "description": "full and empty are mutually exclusive.",
         "category": "status", "signals": ["full", "empty"],
         "source_section": "Status flags"},
        {"feature_id": "F4", "title": "Error signalling",
         "description": "Refused requests raise err one cycle later.",
         "category": "error", "signals": ["req", "full", "err"],
         "source_section": "Error signalling"},
    ]
}

CHECKPOINTS = {
    "F1": [
        {"description": "Granted requests are acknowledged with one cycle latency.",
         "signals": ["req", "full", "ack"],
         "trigger": "req is high while full is low",
         "expected": "ack is high on the next cycle",
         "timing": "exactly one cycle after the request"},
        {"description": "Every request is acknowledged on the next cycle.",
         "signals": ["req", "ack"],
         "trigger": "req is high",
         "expected": "ack is high on the next cycle",
         "timing": "one cycle after the request"},
    ],
    "F2": [
        {"description": "An acknowledge implies a request one cycle earlier.",
         "signals": ["req", "ack"],
         "trigger": "ack is high",
         "expected": "req was high on the previous cycle",
         "timing": "looking back one cycle"},
        {"description": "A rising acknowledge implies a request one cycle earlier.",
         "signals": ["req", "ack"],
         "trigger": "ack rises",
         "expected": "req was high on the previous cycle",
         "timing": "looking back one cycle"},
    ],
    "F3": [
        {"description": "full and empty are never asserted together.",
         "signals": ["full", "empty"],
         "trigger": "any cycle",
         "expected": "full and empty are not both high",
         "timing": "same cycle"},
        {"description": "A full FIFO is not empty.",
         "signals": ["full", "empty"],
         "trigger": "full is high",
         "expected": "empty is low",
         "timing": "same cycle"},
    ],
    "F4": [
        {"description": "err implies a refused request one cycle earlier.",
         "signals": ["req", "full", "err"],
         "trigger": "err is high",
         "expected": "req and full were both high on the previous cycle",
         "timing": "looking back one cycle"},
        {"description": "A refused request raises err in the same cycle.",
         "signals": ["req", "full", "err"],
         "trigger": "req is high while full is high",
         "expected": "err is high in the same cycle",
         "timing": "same cycle"},
    ],
}

SVAS = {
    "F1.0": "assert property (@(posedge clk) req && !full |-> ##1 ack);",
    "F1.1": "assert property (@(posedge clk) req |-> ##1 ack);",
    "F2.0": "assert property (@(posedge clk) ack |-> $past(req, 1));",
    "F2.1": "assert property (@(posedge clk) $rose(ack) |-> $past(req, 1));",
    "F3.0": "assert property (@(posedge clk) !(full && empty));",
    "F3.1": "assert property (@(posedge clk) full |-> !empty);",
    "F4.0": "assert property (@(posedge clk) err |-> $past(req && full, 1));",
    "F4.1": "assert property (@(posedge clk) req && full |-> err);",
}


def fenced(doc: dict, prose: str) -> str:
    return f"{prose}\n```json\n{json.dumps(doc, indent=1)}\n```\n"


def scenario() -> dict:
    slug = "toy_fifo_controller"
    entries = {
        f"{slug}/plan": fenced(PLAN_DOC, "Here is the verification plan."),
        f"{slug}/features": fenced(FEATURES_DOC, "Derived feature list:"),
    }
    for fid, checkpoints in CHECKPOINTS.items():
        entries[f"{slug}/checkpoints/{fid}"] = fenced(
            {"checkpoints": checkpoints}, f"Checkpoints for {fid}:")
    for key, sva in SVAS.items():
        entries[f"{slug}/svas/{key}"] = fenced(
            {"svas": [sva]}, "Assertion implementing the checkpoint:")
    return entries


# traces: rows are (req, ack, full, empty, err) per cycle
SUITE = {
    "design_ref": "toy_fifo_controller",
    "signals": ["req", "ack", "full", "empty", "err"],
    "golden_traces": [
        {"cycles": [
            [1, 0, 0, 1, 0],
            [0, 1, 0, 0, 0],
            [1, 0, 1, 0, 0],
            [0, 0, 1, 0, 1],
            [1, 0, 0, 0, 0],
            [0, 1, 0, 0, 0],
            [0, 0, 0, 1, 0],
            [1, 0, 0, 1, 0],
        ]},
        {"cycles": [
            [0, 0, 0, 1, 0],
            [1, 0, 0, 1, 0],
            [0, 1, 0, 0, 0],
            [1, 0, 0, 0, 0],
            [0, 1, 0, 0, 0],
            [0, 0, 0, 1, 0],
        ]},
    ],
    "bug_traces": [
        {"bug_type": "protocol_violation", "cycles": [
            [0, 0, 0, 1, 0],
            [0, 1, 0, 0, 0],
            [0, 0, 0, 1, 0],
            [0, 0, 0, 1, 0],
        ]},
        {"bug_type": "illegal_branch", "cycles": [
            [0, 0, 0, 1, 0],
            [0, 0, 0, 1, 1],
            [0, 0, 0, 1, 0],
        ]},
        {"bug_type": "handshake_timeout", "cycles": [
            [1, 0, 0, 1, 0],
            [0, 0, 0, 1, 0],
            [0, 0, 0, 1, 0],
        ]},
        {"bug_type": "stuck_signal", "cycles": [
            [0, 0, 1, 1, 0],
            [0, 0, 1, 1, 0],
            [0, 0, 0, 1, 0],
        ]},
        {"bug_type": "fifo_underflow", "cycles": [
            [1, 0, 0, 1, 0],
            [0, 1, 0, 1, 0],
            [0, 0, 0, 1, 0],
        ]},
    ],
}

PIPELINE_CONFIG = {
    "agents": {
        "planner": {"backend": {"type": "scripted_mock", "scenario_ref": "scenario.json"},
                    "temperature": 0.2},
        "feature_gen": {"backend": {"type": "scripted_mock", "scenario_ref": "scenario.json"},
                        "temperature": 0.2},
        "checkpoint_gen": {"backend": {"type": "scripted_mock",
                                       "scenario_ref": "scenario.json"},
                           "temperature": 0.2},
        "sva_gen": {"backend": {"type": "scripted_mock", "scenario_ref": "scenario.json"},
                    "temperature": 0.2},
    },
    "stages": {
        "plan": {"agent": "planner"},
        "features": {"agent": "feature_gen"},
        "checkpoints": {"agent": "checkpoint_gen"},
        "svas": {"agent": "sva_gen"},
    },
}

BRIDGE_CONFIG = {
    "bridge_agents": {
        "generator": {"backend": {"type": "scripted_mock", "scenario_ref": "bridge_scenario.json"},
                      "temperature": 0.2},
        "augmenter": {"backend": {"type": "scripted_mock", "scenario_ref": "bridge_scenario.json"},
                      "temperature": 0.2},
        "reverse": {"backend": {"type": "scripted_mock", "scenario_ref": "bridge_scenario.json"},
                    "temperature": 0.2},
    }
}


GOLDEN_SVA_TEXT = SVAS["F1.0"]

BRIDGE_CHECKPOINT = {
    "description": "Granted requests are acknowledged with one cycle latency.",
    "signals": ["req", "full", "ack"],
    "trigger": "req is high while full is low",
    "expected": "ack is high on the next cycle",
    "timing": "exactly one cycle after the request",
}


def bridge_scenario() -> dict:
    return {
        "bridge/sva_to_checkpoint/*": fenced(
            {"checkpoints": [BRIDGE_CHECKPOINT]}, "Checkpoint for the assertion:"),
        "bridge/reverse/*": GOLDEN_SVA_TEXT,
        "bridge/bridged/*": GOLDEN_SVA_TEXT,
        "bridge/plan_to_features/*": fenced(FEATURES_DOC, "Feature candidates:"),
        "bridge/feature_to_checkpoints/*": fenced(
            {"checkpoints": CHECKPOINTS["F1"]}, "Checkpoint candidates:"),
    }


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / "design_spec.json").write_text(json.dumps(DESIGN_SPEC, indent=1) + "\n")
    (FIXTURES / "scenario.json").write_text(json.dumps(scenario(), indent=1) + "\n")
    (FIXTURES / "bridge_scenario.json").write_text(
        json.dumps(bridge_scenario(), indent=1) + "\n")
    (FIXTURES / "trace_suite.json").write_text(json.dumps(SUITE, indent=1) + "\n")
    (FIXTURES / "pipeline_config.json").write_text(
        json.dumps(PIPELINE_CONFIG, indent=1) + "\n")
    (FIXTURES / "bridge_config.json").write_text(json.dumps(BRIDGE_CONFIG, indent=1) + "\n")
    print(f"wrote fixtures under {FIXTURES}")


if __name__ == "__main__":
    main()
