"""Thin client for the codec service.

Without a base URL the client mounts the service app in-process, so CLI
invocations work with no running server while still exercising the exact
HTTP surface a remote deployment exposes.
"""
from __future__ import annotations

from typing import Type, TypeVar

from pydantic import BaseModel

from . import schemas

M = TypeVar("M", bound=BaseModel)


class ServiceError(Exception):
    """Error response from the service, with its machine-parseable code."""

    def __init__(self, code: str, message: str, offset: int | None = None):
        super().__init__(message)
        self.code = code
        self.offset = offset


class CodecClient:
    def __init__(self, base_url: str | None = None):
        if base_url:
            import httpx

            self._http = httpx.Client(base_url=base_url, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                # some starlette releases deprecate their test client's
                # transport; it is still the supported in-process client
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import app

            self._http = TestClient(app)

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "CodecClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _parse(self, response, model: Type[M]) -> M:
        if response.status_code >= 400:
            try:
                body = response.json()
            except ValueError:
                body = {}
            raise ServiceError(
                code=body.get("code", f"E_HTTP_{response.status_code}"),
                message=body.get("message", response.text),
                offset=body.get("offset"),
            )
        return model.model_validate(response.json())

    def _post(self, path: str, request: BaseModel, model: Type[M]) -> M:
        return self._parse(self._http.post(path, json=request.model_dump()), model)

    def health(self) -> schemas.HealthResponse:
        return self._parse(self._http.get("/health"), schemas.HealthResponse)

    def level(self, level_id: int) -> schemas.LevelInfo:
        return self._parse(self._http.get(f"/levels/{level_id}"), schemas.LevelInfo)

    def levels(self) -> list[schemas.LevelInfo]:
        response = self._http.get("/levels")
        if response.status_code >= 400:
            self._parse(response, schemas.LevelInfo)
        return [schemas.LevelInfo.model_validate(item) for item in response.json()]

    def rate(self, request: schemas.RateRequest) -> schemas.RateResponse:
        return self._post("/rate", request, schemas.RateResponse)

    def encode(self, request: schemas.EncodeRequest) -> schemas.EncodeResponse:
        return self._post("/encode", request, schemas.EncodeResponse)

    def decode(self, request: schemas.DecodeRequest) -> schemas.DecodeResponse:
        return self._post("/decode", request, schemas.DecodeResponse)

    def inspect(self, request: schemas.InspectRequest) -> schemas.InspectResponse:
        return self._post("/inspect", request, schemas.InspectResponse)

    def render(self, request: schemas.RenderRequest) -> schemas.RenderResponse:
        return self._post("/render", request, schemas.RenderResponse)

    def fixtures(self, request: schemas.FixtureRequest) -> schemas.FixtureResponse:
        return self._post("/fixtures", request, schemas.FixtureResponse)
