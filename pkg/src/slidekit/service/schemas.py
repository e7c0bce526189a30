"""Request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    rater_id: str = Field(min_length=1, max_length=200)


class SessionInfo(BaseModel):
    session_id: str
    rater_id: str
    n_samples: int
    n_methods: int
    ranked: int
    done: bool


class Candidate(BaseModel):
    label: str
    image_url: str


class NextComparison(BaseModel):
    done: bool
    sample_id: str | None = None
    index: int | None = None
    total: int | None = None
    original_url: str | None = None
    candidates: list[Candidate] = []
    ranked: int = 0


class SubmitRankingRequest(BaseModel):
    sample_id: str
    ranking: list[str] = Field(description="blind labels, best first")
    idempotency_key: str = ""


class SubmitRankingResponse(BaseModel):
    accepted: bool
    ranked: int
    total: int
    done: bool


class Standing(BaseModel):
    method: str
    elo: float
    top_rank_pct: float


class Leaderboard(BaseModel):
    standings: list[Standing]
    kendalls_w: float | None
    n_rankings: int
    rating_sum: float


class DerenderRequest(BaseModel):
    image_b64: str
    start: str = "skeleton"
    refine_steps: int = 0
    detections: list[dict] | None = None
    max_side: int = 1024
    inpaint_radius: int = 3
    conf_threshold: float = 0.25


class AssetPayload(BaseModel):
    filename: str
    png_b64: str


class DerenderResponse(BaseModel):
    svg: str
    passes: int
    repairs: list[str]
    background_png_b64: str
    assets: list[AssetPayload]


class EvaluateRequest(BaseModel):
    gt_svg: str
    pred_svg: str
    gt_png_b64: str
    pred_png_b64: str


class EvaluateResponse(BaseModel):
    miou: float
    ocr_accuracy: float
    mse: float
