"""HTTP facade over the key-rate library.

All numerical work stays in the core modules; handlers translate between
JSON payloads and the dataclass API.  Domain errors (unphysical parameters,
singular channels, failed root brackets) come back as 422 responses whose
detail names the offending quantity.
"""
from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..analysis import (
    BracketError,
    SweepSpec,
    find_max_distance,
    find_tolerable_noise,
    run_sweep,
    tolerable_noise_surface,
)
from ..gaussian import UnphysicalStateError
from ..keyrate import secret_key_rate
from ..montecarlo import run_validation
from ..protocol import SingularChannelError
from .models import (
    CheckOut,
    DefaultsOut,
    KeyRateOut,
    MaxDistanceOut,
    ParamsIn,
    SurfaceCellOut,
    SurfaceIn,
    SurfaceOut,
    SweepIn,
    SweepOut,
    SweepRowOut,
    TolerableNoiseIn,
    TolerableNoiseOut,
    ValidateIn,
    ValidateOut,
)


def create_app() -> FastAPI:
    app = FastAPI(title="twoway-cvqkd", version=__version__)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(SingularChannelError)
    async def _singular(request: Request, exc: SingularChannelError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(UnphysicalStateError)
    async def _unphysical(request: Request, exc: UnphysicalStateError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(BracketError)
    async def _bracket(request: Request, exc: BracketError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/api/health")
    async def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/api/defaults", response_model=DefaultsOut)
    async def defaults() -> DefaultsOut:
        from ..config import parse_config

        config = parse_config(None)
        p = config.params
        return DefaultsOut(
            params=ParamsIn(
                channel={
                    "distance_km": p.channel.distance_km,
                    "excess_noise": p.channel.excess_noise,
                    "loss_db_per_km": p.channel.loss_db_per_km,
                },
                detector={
                    "kind": p.detector.kind,
                    "efficiency": p.detector.efficiency,
                    "electronic_noise": p.detector.electronic_noise,
                },
                amplifier={
                    "kind": p.amplifier.kind,
                    "gain": p.amplifier.gain,
                    "inherent_noise": p.amplifier.inherent_noise,
                },
                v_a=p.v_a,
                v_b=p.v_b,
                t_a=p.t_a,
                beta=p.beta,
            ),
            seed=config.seed,
            samples=config.samples,
        )

    @app.post("/api/keyrate", response_model=KeyRateOut)
    async def keyrate(body: ParamsIn) -> KeyRateOut:
        return KeyRateOut.from_result(secret_key_rate(body.build()))

    @app.post("/api/sweep", response_model=SweepOut)
    async def sweep(body: SweepIn) -> SweepOut:
        variants = None
        if body.variants is not None:
            variants = tuple(v.build() for v in body.variants)
        spec = SweepSpec(
            base=body.params.build(),
            start=body.start,
            stop=body.stop,
            step=body.step,
            variable=body.variable,
            variants=variants,
        )
        rows = run_sweep(spec)
        labels = [v.label for v in spec.resolved_variants()]
        return SweepOut(
            variable=body.variable,
            labels=labels,
            rows=[SweepRowOut.from_row(row) for row in rows],
        )

    @app.post("/api/max-distance", response_model=MaxDistanceOut)
    async def max_distance(body: ParamsIn) -> MaxDistanceOut:
        return MaxDistanceOut(distance_km=find_max_distance(body.build()))

    @app.post("/api/tolerable-noise", response_model=TolerableNoiseOut)
    async def tolerable_noise(body: TolerableNoiseIn) -> TolerableNoiseOut:
        n_tol = find_tolerable_noise(body.params.build())
        return TolerableNoiseOut(n_tol=n_tol, no_improvement=n_tol is None)

    @app.post("/api/surface", response_model=SurfaceOut)
    async def surface(body: SurfaceIn) -> SurfaceOut:
        cells = tolerable_noise_surface(
            body.params.build(),
            gain_range=body.gain_range,
            distance_range=body.distance_range,
        )
        return SurfaceOut(cells=[SurfaceCellOut.from_cell(c) for c in cells])

    @app.post("/api/validate", response_model=ValidateOut)
    async def validate(body: ValidateIn) -> ValidateOut:
        checks = run_validation(body.params.build(), seed=body.seed, n_samples=body.samples)
        outs = [CheckOut.from_check(c) for c in checks]
        return ValidateOut(checks=outs, all_passed=all(c.passed for c in outs))

    return app


app = create_app()
