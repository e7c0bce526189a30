"""Vision-language backends behind a single wire contract.

Every backend receives ``BackendRequest`` (prompt text containing the
``<image>`` marker plus the raster bytes) and returns the raw text of the
model response. The HTTP adapter speaks a minimal JSON POST contract::

    request:  {"model", "prompt", "image_b64", "image_mime", "max_tokens", "temperature"}
    response: {"svg_text": "..."}  or  {"error": "..."}

The mock oracle backend answers with ground truth looked up by raster
content, optionally jittered, and is the workhorse of the test suite.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import httpx

from .errors import BackendError
from .model import BBox, ImageAsset, TextAsset
from .raster import Raster, decode_image, load_png, resize_max_side
from .svgio import parse_slide_svg, serialize_slide_svg

DEFAULT_MAX_TOKENS = 8192
DEFAULT_TEMPERATURE = 0.0

ENV_URL_TEMPLATE = "SLIDER_BACKEND_{name}_URL"
ENV_KEY_TEMPLATE = "SLIDER_BACKEND_{name}_KEY"


@dataclass(frozen=True)
class BackendRequest:
    prompt: str
    image: bytes
    image_mime: str = "image/png"
    max_tokens: int = DEFAULT_MAX_TOKENS
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self):
        if not self.image:
            raise ValueError("request image must be non-empty")
        if self.prompt.count("<image>") != 1:
            raise ValueError("prompt must contain the <image> marker exactly once")

    def to_wire(self, model: str) -> dict:
        return {
            "model": model,
            "prompt": self.prompt,
            "image_b64": base64.b64encode(self.image).decode("ascii"),
            "image_mime": self.image_mime,
            "max_tokens": self.max_tokens,
            "temperature": self.temperature,
        }


class Backend(Protocol):
    name: str

    def generate(self, request: BackendRequest) -> str:
        """Return the raw text response for a derendering request."""
        ...


class HttpBackend:
    """JSON-over-HTTP adapter with retries on transport errors and 5xx.

    Retries re-send the identical request body; backoff delays default to
    1s/2s/4s and are injectable for tests.
    """

    def __init__(
        self,
        name: str,
        url: str,
        api_key: str | None = None,
        model: str = "",
        max_attempts: int = 3,
        backoff: tuple[float, ...] = (1.0, 2.0, 4.0),
        sleep: Callable[[float], None] = time.sleep,
        transport: httpx.BaseTransport | None = None,
        timeout: float = 120.0,
    ):
        self.name = name
        self.url = url
        self.model = model
        self.max_attempts = max_attempts
        self.backoff = backoff
        self._sleep = sleep
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(headers=headers, transport=transport, timeout=timeout)

    @classmethod
    def from_env(cls, name: str, **kwargs) -> "HttpBackend":
        """Resolve URL and key from SLIDER_BACKEND_<NAME>_URL / _KEY."""
        upper = name.upper().replace("-", "_")
        url = os.environ.get(ENV_URL_TEMPLATE.format(name=upper))
        if not url:
            raise BackendError(f"environment variable {ENV_URL_TEMPLATE.format(name=upper)} not set")
        key = os.environ.get(ENV_KEY_TEMPLATE.format(name=upper))
        return cls(name=name, url=url, api_key=key, **kwargs)

    def generate(self, request: BackendRequest) -> str:
        body = request.to_wire(self.model)
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            try:
                response = self._client.post(self.url, json=body)
            except httpx.HTTPError as exc:
                last_error = exc
            else:
                if response.status_code >= 500:
                    last_error = BackendError(f"server error {response.status_code}")
                elif response.status_code >= 400:
                    raise BackendError(f"backend rejected request: {response.status_code}")
                else:
                    payload = response.json()
                    if "error" in payload:
                        raise BackendError(f"backend error: {payload['error']}")
                    if "svg_text" not in payload:
                        raise BackendError("backend response lacks svg_text")
                    return payload["svg_text"]
            if attempt < self.max_attempts - 1:
                delay = self.backoff[min(attempt, len(self.backoff) - 1)]
                self._sleep(delay)
        raise BackendError(f"backend {self.name!r} failed after {self.max_attempts} attempts: {last_error}")


def _content_key(img: Raster) -> str:
    return hashlib.sha256(img.tobytes() + str(img.shape).encode()).hexdigest()


class MockOracleBackend:
    """Answers with the ground-truth SVG for a known raster.

    Rasters are recognized by pixel content after the standard resize, so
    re-encoded PNG bytes still match. With ``perturb`` set, first-pass
    answers get their boxes jittered by up to ±k percent; a request whose
    context is already a complete prediction (no UNKNOWN markers, i.e. a
    refinement pass) is always answered with exact ground truth.
    """

    name = "mock"

    def __init__(
        self,
        perturb: float = 0.0,
        seed: int = 0,
        max_side: int = 1024,
    ):
        self.perturb = perturb
        self.max_side = max_side
        self._rng = random.Random(seed)
        self._answers: dict[str, str] = {}

    @classmethod
    def from_manifest(cls, manifest_path: str | Path, **kwargs) -> "MockOracleBackend":
        """Manifest is a JSON object mapping image paths to GT SVG paths."""
        backend = cls(**kwargs)
        manifest_path = Path(manifest_path)
        mapping = json.loads(manifest_path.read_text(encoding="utf-8"))
        base = manifest_path.parent
        for image_path, svg_path in mapping.items():
            image_file = Path(image_path)
            svg_file = Path(svg_path)
            if not image_file.is_absolute():
                image_file = base / image_file
            if not svg_file.is_absolute():
                svg_file = base / svg_file
            backend.register(load_png(image_file), svg_file.read_text(encoding="utf-8"))
        return backend

    def register(self, raster: Raster, svg_text: str) -> None:
        resized = resize_max_side(raster, self.max_side)
        self._answers[_content_key(resized)] = svg_text

    def _jitter(self, svg_text: str) -> str:
        doc = parse_slide_svg(svg_text)

        def jitter_box(bbox: BBox) -> BBox:
            k = self.perturb
            x = min(max(bbox.x + self._rng.uniform(-k, k), 0.0), 99.0)
            y = min(max(bbox.y + self._rng.uniform(-k, k), 0.0), 99.0)
            w = max(min(bbox.w + self._rng.uniform(-k, k), 100.0 - x), 0.1)
            h = max(min(bbox.h + self._rng.uniform(-k, k), 100.0 - y), 0.1)
            return BBox(x, y, w, h)

        images = tuple(ImageAsset(bbox=jitter_box(i.bbox), href=i.href) for i in doc.images)
        texts = tuple(
            TextAsset(bbox=jitter_box(t.bbox), style=t.style, lines=t.lines) for t in doc.texts
        )
        return serialize_slide_svg(doc.with_assets(images=images, texts=texts))

    def generate(self, request: BackendRequest) -> str:
        img = decode_image(request.image)
        key = _content_key(resize_max_side(img, self.max_side))
        if key not in self._answers:
            raise BackendError("mock oracle has no ground truth for this raster")
        answer = self._answers[key]
        context = request.prompt.split("useful: ", 1)[-1]
        is_refinement = "UNKNOWN" not in context and "<svg" in context
        if self.perturb > 0 and not is_refinement:
            return self._jitter(answer)
        return answer


@dataclass
class CountingBackend:
    """Wrapper that counts calls; used to assert call-budget properties."""

    inner: Backend
    calls: int = 0
    requests: list = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.inner.name

    def generate(self, request: BackendRequest) -> str:
        self.calls += 1
        self.requests.append(request)
        return self.inner.generate(request)
