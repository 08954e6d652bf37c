"""End-to-end runs of the command-line front end."""

import io
import json

import pytest

from cbitcl_cli import run, to_jsonable
from measure import EsscherSpec, esscher_transform
from model_config import dumps_model, load_model, model_from_dict, model_hash


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    status = run(list(argv), stdout=out, stderr=err)
    return status, out.getvalue(), err.getvalue()


def example(workspace, name):
    return str(workspace / f"{name}.example.json")


class TestPrice:
    def test_black_scholes_at_the_money(self, workspace):
        status, out, _ = invoke("price", "-m", example(workspace, "black_scholes"), "-K", "1.0", "-T", "1", "-q")
        assert status == 0
        payload = json.loads(out)
        row = payload["results"][0]
        assert row["price"] == pytest.approx(0.0796557, abs=1e-7)
        assert row["implied_vol"] == pytest.approx(0.2, rel=1e-6)
        assert payload["model_hash"] == payload["_provenance"]["model_hash"]
        assert payload["model"]["name"] == "black_scholes"

    def test_monte_carlo_columns(self, workspace):
        status, out, _ = invoke(
            "--seed", "3", "--paths", "500", "--step", "0.0625",
            "price", "-m", example(workspace, "heston"), "-K", "1.0", "-T", "1", "--mc", "-q",
        )
        assert status == 0
        row = json.loads(out)["results"][0]
        assert row["mc_stderr"] > 0.0
        assert abs(row["mc_price"] - row["price"]) < 5.0 * row["mc_stderr"] + 5e-3

    def test_unreachable_tolerance_is_numeric_failure(self, workspace):
        status, _, err = invoke("price", "-m", example(workspace, "heston"), "-K", "1", "-T", "1", "--tol", "1e-300", "-q")
        assert status == 2
        assert err.startswith("E-NUMERIC")


class TestMoments:
    def test_outside_frontier(self, workspace):
        status, out, _ = invoke("moments", "-m", example(workspace, "alpha_cir"), "--u3", "1.2", "-q")
        assert status == 0
        payload = json.loads(out)
        assert payload["lifetime"]["value"] == 0.0
        assert "unavailable" in payload["asymptotic"]

    def test_inside_frontier(self, workspace):
        status, out, _ = invoke("moments", "-m", example(workspace, "alpha_cir"), "--u3", "0.5", "-T", "2", "-q")
        assert status == 0
        payload = json.loads(out)
        assert payload["lifetime"]["value"] == "inf"
        assert payload["moment_domain_full"] is True
        assert 0.0 < payload["transform"]["value"] < 1.0
        assert payload["asymptotic"]["xi"] < 0.0

    @pytest.mark.parametrize("u3", ["-0.5", "1.5"])
    def test_positive_noise_exponent(self, workspace, u3):
        status, out, err = invoke("moments", "-m", example(workspace, "heston"), f"--u3={u3}", "-q")
        assert status == 0, err
        payload = json.loads(out)
        assert payload["lifetime"]["value"] == "inf"
        assert 0.0 < payload["asymptotic"]["xi"] < payload["chi"]


class TestTransformMeasure:
    def test_identity_is_byte_identical(self, workspace, tmp_path):
        model, _ = load_model(example(workspace, "heston"))
        canonical = tmp_path / "heston.json"
        canonical.write_text(dumps_model(model, "heston"), encoding="utf-8")
        status, out, _ = invoke("transform-measure", "-m", str(canonical), "-q")
        assert status == 0
        assert out == canonical.read_text(encoding="utf-8")

    def test_tilt_matches_library(self, workspace, tmp_path):
        model, _ = load_model(example(workspace, "tempered_cgmy"))
        target = tmp_path / "tilted.json"
        status, _, _ = invoke(
            "transform-measure", "-m", example(workspace, "tempered_cgmy"),
            "--zeta", "-0.5", "--lambda", "0.5", "-o", str(target), "-q",
        )
        assert status == 0
        written = model_from_dict(json.loads(target.read_text(encoding="utf-8")))
        assert written == esscher_transform(model, EsscherSpec(model, -0.5, 0.5))

    def test_stable_rejects_positive_tilt(self, workspace):
        status, out, err = invoke("transform-measure", "-m", example(workspace, "alpha_cir"), "--zeta", "0.5", "-q")
        assert status == 1
        assert err.startswith("E-DOMAIN")
        assert out == ""


class TestSimulate:
    def test_deterministic_csv(self, workspace):
        argv = ("--seed", "5", "--paths", "20", "--step", "0.125",
                "simulate", "-m", example(workspace, "alpha_cir"), "-T", "0.5", "-q")
        first = invoke(*argv)
        second = invoke(*argv)
        assert first[0] == 0
        assert first[1] == second[1]
        lines = first[1].splitlines()
        model, _ = load_model(example(workspace, "alpha_cir"))
        assert f"# model_hash: {model_hash(model)}" in lines
        body = [line for line in lines if not line.startswith("#")]
        assert body[0] == "path,t,X,Y,Z"
        assert len(body) == 1 + 20 * 5

    def test_lamperti_scheme(self, workspace):
        status, out, _ = invoke(
            "--paths", "10", "--step", "0.25",
            "simulate", "-m", example(workspace, "heston"), "-T", "0.5", "--scheme", "lamperti", "-q",
        )
        assert status == 0
        assert "# route: lamperti" in out.splitlines()


class TestWingsAndCharFn:
    def test_wings_with_smile(self, workspace, tmp_path):
        smile = tmp_path / "smile.csv"
        status, out, _ = invoke(
            "wings", "-m", example(workspace, "black_scholes"), "-T", "1",
            "--smile", str(smile), "--k-min", "-0.2", "--k-max", "0.2", "--k-count", "3", "-q",
        )
        assert status == 0
        payload = json.loads(out)
        assert payload["wings"]["p_plus"] == "inf"
        rows = [line for line in smile.read_text(encoding="utf-8").splitlines() if not line.startswith("#")]
        assert rows[0] == "k,K,price,iv,slope"
        assert len(rows) == 4
        assert float(rows[1].split(",")[3]) == pytest.approx(0.2, rel=1e-5)

    def test_alpha_cir_slopes(self, workspace):
        status, out, _ = invoke("wings", "-m", example(workspace, "alpha_cir"), "-T", "2", "-q")
        assert status == 0
        wings = json.loads(out)["wings"]
        assert wings["left"] == pytest.approx(1.0) and wings["right"] == pytest.approx(1.0)

    def test_joint_char_fn_at_origin(self, workspace):
        status, out, _ = invoke("char-fn", "-m", example(workspace, "heston"), "-T", "1", "--joint", "0", "0", "0", "-q")
        assert status == 0
        assert json.loads(out)["joint"]["value"] == [1.0, 0.0]

    def test_log_price_char_fn(self, workspace):
        status, out, _ = invoke("char-fn", "-m", example(workspace, "black_scholes"), "-T", "1", "--u", "0", "1.5", "-q")
        assert status == 0
        values = json.loads(out)["log_price"]
        assert values[0]["value"] == [1.0, 0.0]
        re, im = values[1]["value"]
        assert abs(complex(re, im)) < 1.0


class TestErrors:
    def test_missing_model_file(self, tmp_path):
        status, _, err = invoke("moments", "-m", str(tmp_path / "absent.json"), "-q")
        assert status == 1
        assert err.startswith("E-CONFIG")

    def test_usage_error(self):
        status, _, err = invoke("price", "-K", "1")
        assert status == 1
        assert err.startswith("E-CONFIG")

    def test_invalid_model(self, workspace, tmp_path):
        data = json.loads((workspace / "heston.example.json").read_text(encoding="utf-8"))
        data["correlation"]["rho"] = 3.0
        target = tmp_path / "bad.json"
        target.write_text(json.dumps(data), encoding="utf-8")
        status, _, err = invoke("moments", "-m", str(target), "-q")
        assert status == 1
        assert "correlation.rho" in err

    def test_trace_file(self, workspace, tmp_path):
        trace = tmp_path / "runs.jsonl"
        status, _, err = invoke("moments", "-m", example(workspace, "heston"), "--trace", str(trace))
        assert status == 0
        entries = [json.loads(line) for line in trace.read_text(encoding="utf-8").splitlines()]
        assert entries[-1]["phase"] == "DONE"
        assert {e["phase"] for e in entries} >= {"LOAD_MODEL", "VALIDATE", "COMPUTE", "WRITE"}
        assert "[DONE]" in err

    def test_failed_run_is_traced(self, workspace, tmp_path):
        trace = tmp_path / "runs.jsonl"
        invoke("transform-measure", "-m", example(workspace, "alpha_cir"), "--zeta", "0.5", "--trace", str(trace), "-q")
        entries = [json.loads(line) for line in trace.read_text(encoding="utf-8").splitlines()]
        assert entries[-1]["phase"] == "FAILED"
        assert entries[-1]["message"] == "E-DOMAIN"


def test_to_jsonable():
    assert to_jsonable({"a": [float("inf"), -float("inf"), float("nan"), 1 + 2j]}) == {"a": ["inf", "-inf", "nan", [1.0, 2.0]]}
