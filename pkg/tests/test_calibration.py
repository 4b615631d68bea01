import json
from pathlib import Path

ARTIFACT = Path(__file__).resolve().parents[1] / "calibration" / "altproj_breakdown.json"


def test_acceptance_alpha_is_at_most_half_of_breakdown():
    data = json.loads(ARTIFACT.read_text())
    assert data["regime"] == {"m": 200, "n": 200, "r": 3, "kappa": 5.0, "success_tol": 1e-6,
                              "seeds": data["regime"]["seeds"], "solver": "altproj defaults"}
    assert data["breakdown_alpha"] is not None
    assert data["acceptance_alpha"] <= data["breakdown_alpha"] / 2
    below = [row for row in data["sweep"] if row["alpha"] <= data["acceptance_alpha"]]
    assert below and all(row["success_rate"] == 1.0 for row in below)
