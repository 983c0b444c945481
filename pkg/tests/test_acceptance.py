"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -s`` (lines are printed even
without ``-s``) or through ``gapmeasures verify --suite all``.
"""

import pytest

from gapmeasures.cli import main
from gapmeasures.verify import CRITERIA, DEFAULTS, Check, run_criterion


def _cli_reruns(tmp_path):
    """Run each CLI command twice with identical arguments; compare output bytes."""
    rho, sigma = tmp_path / "rho.json", tmp_path / "sigma.json"
    main(["density", "--preset", "thermal-qho", "--dim", "4", "--beta", "1", "--out", str(rho), "--quiet"])
    main(["density", "--preset", "maximally-mixed", "--dim", "4", "--out", str(sigma), "--quiet"])
    batch = tmp_path / "batch.csv"
    main(["sample", "--rho", str(rho), "--n", "2000", "--out", str(batch), "--quiet"])
    commands = {
        "density": ["density", "--preset", "thermal-qho", "--dim", "4", "--beta", "1"],
        "sample": ["sample", "--rho", str(rho), "--n", "2000", "--measure", "GAP-reweight"],
        "estimate": ["estimate", str(batch), "--ref", str(rho)],
        "charfn": ["charfn", "--rho", str(rho), "--n", "5000"],
        "continuity": ["continuity", "--rho", str(rho), "--sigma", str(sigma), "--n", "2000"],
        "verify --only 1,5,7": ["verify", "--only", "1,5,7"],
    }
    checks = []
    for name, argv in commands.items():
        outs = []
        for rep in range(2):
            path = tmp_path / f"{name.split()[0]}-{rep}.out"
            main(argv + ["--out", str(path), "--quiet"])
            outs.append(path.read_bytes())
        checks.append(Check(f"cli rerun identical [{name}]", float(outs[0] == outs[1] != b""), 1.0, "=="))
    return checks


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys, tmp_path):
    result = run_criterion(number, DEFAULTS["seed"])
    if number == 10:
        result.checks.extend(_cli_reruns(tmp_path))
    with capsys.disabled():
        print("\n" + result.line())
        for check in result.checks:
            if not check.passed:
                print(f"        failed: {check.label} = {check.value:.6g} {check.op} {check.threshold:.6g}")
    assert result.passed
    assert result.seconds < result.budget
