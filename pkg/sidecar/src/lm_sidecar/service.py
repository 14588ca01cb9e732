"""HTTP scoring service.

Exposes the boundary-window scorer and the topic classifier over a small
JSON API. Malformed payloads answer 400, semantically empty ones 422,
and both endpoints answer 503 with a Retry-After header until the
checkpoints finish loading.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import SidecarError, add_model_args, settings_from_args
from .models import ModelBundle


class ScoreRequest(BaseModel):
    sentences: list[str]
    C: int = Field(ge=1)


class ClassifyRequest(BaseModel):
    text: str
    position_bin: int = Field(ge=0, le=9)


def create_app(bundle: ModelBundle) -> FastAPI:
    app = FastAPI(title="lm-sidecar")

    @app.exception_handler(RequestValidationError)
    async def bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    def require_ready() -> None:
        if bundle.error is not None:
            raise HTTPException(status_code=503, detail=bundle.error)
        if not bundle.ready:
            raise HTTPException(
                status_code=503,
                detail="models are loading",
                headers={"Retry-After": "1"},
            )

    @app.get("/health")
    def health() -> dict:
        if bundle.error is not None:
            return {"status": "error", "detail": bundle.error}
        return {"status": "ready" if bundle.ready else "loading"}

    @app.post("/score")
    def score(req: ScoreRequest) -> dict:
        require_ready()
        if not req.sentences:
            raise HTTPException(status_code=422, detail="sentences is empty")
        try:
            entries = bundle.score_windows(req.sentences, req.C)
        except SidecarError as e:
            raise HTTPException(status_code=422, detail=str(e))
        return {"entries": entries}

    @app.post("/classify")
    def classify(req: ClassifyRequest) -> dict:
        require_ready()
        if not bundle.has_classifier:
            raise HTTPException(
                status_code=503, detail="no classifier is configured"
            )
        try:
            logprobs = bundle.classify_logprobs(req.text, req.position_bin)
        except SidecarError as e:
            raise HTTPException(status_code=422, detail=str(e))
        return {"vocab": list(bundle.vocab), "logprobs": logprobs}

    return app


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lm-sidecar-serve",
        description="serve boundary scores and topic classifications",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8008)
    add_model_args(parser)
    args = parser.parse_args(argv)

    import uvicorn

    try:
        settings = settings_from_args(args)
    except SidecarError as e:
        print(str(e), file=sys.stderr)
        return 2
    bundle = ModelBundle(settings)
    bundle.start()
    uvicorn.run(create_app(bundle), host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
