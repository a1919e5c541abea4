"""Thin client for the HTTP service.

By default requests are served in process through the ASGI app, so the CLI
works without a running server; pass a base URL to talk to a remote one.
"""
from __future__ import annotations

import asyncio
from typing import Any

import httpx


class ServiceError(RuntimeError):
    """The service rejected a request; the message carries its detail."""

    def __init__(self, status_code: int, detail: str):
        super().__init__(detail)
        self.status_code = status_code
        self.detail = detail


def _extract_detail(response: httpx.Response) -> str:
    try:
        payload = response.json()
    except ValueError:
        return response.text
    detail = payload.get("detail", payload)
    if isinstance(detail, str):
        return detail
    # Pydantic validation errors arrive as a list of dicts.
    if isinstance(detail, list):
        parts = []
        for item in detail:
            loc = ".".join(str(p) for p in item.get("loc", []) if p != "body")
            parts.append(f"{loc}: {item.get('msg', item)}")
        return "; ".join(parts)
    return str(detail)


class ServiceClient:
    def __init__(self, base_url: str | None = None):
        self._base_url = base_url
        if base_url is None:
            from .service import create_app

            self._app = create_app()

    def _request(self, method: str, path: str, json: Any = None) -> Any:
        if self._base_url is not None:
            with httpx.Client(base_url=self._base_url, timeout=None) as client:
                response = client.request(method, path, json=json)
        else:
            response = asyncio.run(self._asgi_request(method, path, json))
        if response.status_code >= 400:
            raise ServiceError(response.status_code, _extract_detail(response))
        return response.json()

    async def _asgi_request(self, method: str, path: str, json: Any) -> httpx.Response:
        transport = httpx.ASGITransport(app=self._app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://twoway-cvqkd.local", timeout=None
        ) as client:
            return await client.request(method, path, json=json)

    def get(self, path: str) -> Any:
        return self._request("GET", path)

    def post(self, path: str, payload: Any) -> Any:
        return self._request("POST", path, json=payload)
