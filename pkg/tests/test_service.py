"""HTTP layer: endpoints mirror the library, domain errors become 422s."""
import pytest

from twoway_cvqkd import __version__
from twoway_cvqkd.analysis import find_max_distance, find_tolerable_noise
from twoway_cvqkd.client import ServiceClient, ServiceError
from twoway_cvqkd.keyrate import secret_key_rate
from twoway_cvqkd.protocol import (
    AmplifierSpec,
    ChannelModel,
    DetectorModel,
    ProtocolParams,
)


@pytest.fixture(scope="module")
def client() -> ServiceClient:
    return ServiceClient()


def payload(d=20.0, kind="homodyne", amp=("none", 1.0, 1.0), beta=0.948, eps=0.02):
    return {
        "channel": {"distance_km": d, "excess_noise": eps, "loss_db_per_km": 0.2},
        "detector": {"kind": kind, "efficiency": 0.552, "electronic_noise": 0.015},
        "amplifier": {"kind": amp[0], "gain": amp[1], "inherent_noise": amp[2]},
        "v_a": 40.0,
        "v_b": 40.0,
        "t_a": 0.4,
        "beta": beta,
    }


def params(d=20.0, kind="homodyne", amp=("none", 1.0, 1.0), beta=0.948, eps=0.02):
    return ProtocolParams(
        channel=ChannelModel(d, excess_noise=eps),
        detector=DetectorModel(kind=kind),
        amplifier=AmplifierSpec(*amp),
        beta=beta,
    )


class TestEndpoints:
    def test_health(self, client):
        body = client.get("/api/health")
        assert body == {"status": "ok", "version": __version__}

    def test_defaults_mirror_config(self, client):
        body = client.get("/api/defaults")
        assert body["params"]["beta"] == 0.948
        assert body["params"]["detector"]["efficiency"] == 0.552
        assert body["seed"] == 12345
        assert body["samples"] == 1_000_000

    def test_keyrate_equals_library(self, client):
        body = client.post("/api/keyrate", payload())
        direct = secret_key_rate(params())
        assert body["key_rate"] == direct.key_rate
        assert body["mutual_information"] == direct.mutual_information
        assert body["holevo_bound"] == direct.holevo_bound
        assert body["estimator_gain"] == direct.estimator_gain
        assert len(body["spectrum_conditional"]) == 6

    def test_sweep_defaults_to_kind_variants(self, client):
        body = client.post(
            "/api/sweep",
            {"params": payload(kind="heterodyne"), "start": 1.0, "stop": 3.0, "step": 1.0},
        )
        assert body["labels"] == [
            "noamp", "pia_g2_n1", "pia_g2_n1p5", "pia_g15_n1", "pia_g15_n1p5", "perfect",
        ]
        assert len(body["rows"]) == 3
        row = body["rows"][0]
        assert row["value"] == 1.0
        assert set(row["results"]) == set(body["labels"])

    def test_sweep_explicit_variants(self, client):
        body = client.post(
            "/api/sweep",
            {
                "params": payload(),
                "start": 10.0,
                "stop": 20.0,
                "step": 5.0,
                "variants": [
                    {"label": "bare"},
                    {"label": "boosted", "amplifier": {"kind": "psa", "gain": 15.0}},
                ],
            },
        )
        assert body["labels"] == ["bare", "boosted"]
        for row in body["rows"]:
            assert row["results"]["boosted"]["key_rate"] >= row["results"]["bare"]["key_rate"]

    def test_max_distance_equals_library(self, client):
        body = client.post("/api/max-distance", payload(kind="heterodyne"))
        assert body["distance_km"] == pytest.approx(
            find_max_distance(params(kind="heterodyne")), abs=1e-9
        )

    def test_tolerable_noise_equals_library(self, client):
        request = {"params": payload(d=60.0, kind="heterodyne", amp=("pia", 15.0, 1.0))}
        body = client.post("/api/tolerable-noise", request)
        direct = find_tolerable_noise(params(d=60.0, kind="heterodyne", amp=("pia", 15.0, 1.0)))
        assert body["n_tol"] == pytest.approx(direct, abs=1e-12)
        assert body["no_improvement"] is False

    def test_tolerable_noise_no_improvement(self, client):
        request = {
            "params": payload(d=75.0, kind="heterodyne", amp=("pia", 15.0, 1.0), beta=0.95)
        }
        body = client.post("/api/tolerable-noise", request)
        assert body["n_tol"] is None
        assert body["no_improvement"] is True

    def test_surface_cells(self, client):
        request = {
            "params": payload(kind="heterodyne", amp=("pia", 15.0, 1.0)),
            "gain_range": [15.0, 16.0, 1.0],
            "distance_range": [60.0, 61.0, 1.0],
        }
        body = client.post("/api/surface", request)
        assert len(body["cells"]) == 4
        assert body["cells"][0]["gain"] == 15.0
        assert body["cells"][0]["distance_km"] == 60.0

    def test_validate_runs_the_oracle(self, client):
        request = {"params": payload(), "seed": 99, "samples": 50_000}
        body = client.post("/api/validate", request)
        assert body["all_passed"] is True
        assert len(body["checks"]) == 6


class TestDomainErrors:
    def test_singular_channel_is_422(self, client):
        with pytest.raises(ServiceError) as err:
            client.post("/api/keyrate", payload(d=0.0))
        assert err.value.status_code == 422
        assert "excess noise" in err.value.detail

    def test_bad_detector_is_422_with_named_parameter(self, client):
        bad = payload()
        bad["detector"]["efficiency"] = 1.2
        with pytest.raises(ServiceError) as err:
            client.post("/api/keyrate", bad)
        assert err.value.status_code == 422
        assert "efficiency" in err.value.detail

    def test_tolerable_noise_on_homodyne_is_422(self, client):
        with pytest.raises(ServiceError) as err:
            client.post("/api/tolerable-noise", {"params": payload(amp=("psa", 15.0, 1.0))})
        assert err.value.status_code == 422
        assert "heterodyne" in err.value.detail

    def test_bracket_failure_is_422(self, client):
        with pytest.raises(ServiceError) as err:
            client.post("/api/max-distance", payload(beta=0.0))
        assert err.value.status_code == 422
        assert "no positive key rate" in err.value.detail

    def test_malformed_body_is_422(self, client):
        with pytest.raises(ServiceError) as err:
            client.post("/api/keyrate", {"detector": {"kind": "homodyne"}})
        assert err.value.status_code == 422
        assert "channel" in err.value.detail
