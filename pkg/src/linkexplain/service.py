"""HTTP facade over the predictor and the three explainers, plus durable
feedback capture. This is the contract the review console consumes."""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .evaluation import (
    TECHNIQUES,
    FeedbackRecord,
    agreement_report,
    ingest_feedback,
)
from .graph import UNREACHABLE, PropertyGraph, bfs_distances
from .pipeline import (
    Explainers,
    ExplainerUnavailable,
    NoPathEvidence,
    PipelineConfig,
    build_explainers,
    explain_link,
    serving_features,
    watchlist_predictions,
)
from .predictor import LinkPrediction, ScorerModel
from .verify import Document


def link_id_for(u: str, v: str) -> str:
    a, b = sorted((u, v))
    return f"{a}--{b}"


class FeedbackLog:
    """Append-only JSONL log; every ack is preceded by flush+fsync, and the
    in-memory dedup set is rebuilt from the file on startup."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._seen = set()
        self._records: List[FeedbackRecord] = []
        if self.path.exists():
            with self.path.open() as fh:
                for record in ingest_feedback(fh):
                    self._seen.add((record.link_id, record.technique, record.annotator))
                    self._records.append(record)

    def append(self, record: FeedbackRecord) -> bool:
        """Returns False when the (link, technique, annotator) verdict exists."""
        key = (record.link_id, record.technique, record.annotator)
        with self._lock:
            if key in self._seen:
                return False
            with self.path.open("a") as fh:
                fh.write(json.dumps(record.to_record(), sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._seen.add(key)
            self._records.append(record)
            return True

    def records(self) -> List[FeedbackRecord]:
        with self._lock:
            return list(self._records)


@dataclass
class ServiceState:
    graph: PropertyGraph
    model: ScorerModel
    features: Dict[str, np.ndarray]
    explainers: Explainers
    feedback: FeedbackLog
    config: PipelineConfig = field(default_factory=PipelineConfig)
    predictions: Dict[str, LinkPrediction] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        graph: PropertyGraph,
        model: ScorerModel,
        feedback_path: Path,
        corpus: Optional[Sequence[Document]] = None,
        config: Optional[PipelineConfig] = None,
        predictions: Optional[Sequence[LinkPrediction]] = None,
    ) -> "ServiceState":
        config = config or PipelineConfig(seed=model.seed, anchor_count=model.k)
        features = serving_features(graph, config)
        explainers = build_explainers(graph, model, features, config, corpus=corpus)
        state = cls(
            graph=graph,
            model=model,
            features=features,
            explainers=explainers,
            feedback=FeedbackLog(feedback_path),
            config=config,
        )
        for prediction in predictions or []:
            state.predictions[link_id_for(prediction.u, prediction.v)] = prediction
        return state


class PredictRequest(BaseModel):
    watchlist: List[str]
    threshold: float = 0.5
    top_n: int = 100


class FeedbackRequest(BaseModel):
    link_id: str
    technique: str
    annotator: str
    verdict: str


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="linkexplain service")
    app.state.service = state

    @app.get("/subgraph")
    def get_subgraph(node_id: str, radius: int = 2):
        if node_id not in state.graph:
            raise HTTPException(status_code=404, detail=f"unknown node {node_id!r}")
        if radius == 0:
            members = [node_id]
        else:
            table = bfs_distances(state.graph, [node_id], cutoff=radius)
            members = sorted(table.distances[node_id])
        member_set = set(members)
        nodes = [
            {
                "id": n,
                "label": state.graph.node(n).label,
                "attributes": state.graph.node(n).attribute_map(),
            }
            for n in members
        ]
        edges = [
            {
                "source": e.source,
                "target": e.target,
                "relation_type": e.relation_type,
                "properties": dict(e.properties),
            }
            for e in state.graph.edges
            if e.source in member_set and e.target in member_set
        ]
        overlay = [
            {**p.to_record(), "link_id": lid}
            for lid, p in sorted(state.predictions.items())
            if p.u in member_set and p.v in member_set
        ]
        return {"center": node_id, "radius": radius, "nodes": nodes, "edges": edges,
                "predicted_links": overlay}

    @app.post("/predict")
    def predict(request: PredictRequest):
        if state.model is None:
            raise HTTPException(status_code=409, detail="no model loaded")
        for node_id in request.watchlist:
            if node_id not in state.graph:
                raise HTTPException(status_code=400, detail=f"unknown node {node_id!r}")
        predictions = watchlist_predictions(
            state.model,
            state.graph,
            state.features,
            request.watchlist,
            threshold=request.threshold,
            top_n=request.top_n,
        )
        out = []
        for prediction in predictions:
            lid = link_id_for(prediction.u, prediction.v)
            state.predictions[lid] = prediction
            out.append({**prediction.to_record(), "link_id": lid})
        return {"predictions": out}

    @app.get("/explanations")
    def explanations(link_id: str, technique: str):
        if technique not in TECHNIQUES:
            raise HTTPException(status_code=400, detail=f"unknown technique {technique!r}")
        prediction = state.predictions.get(link_id)
        if prediction is None:
            raise HTTPException(status_code=404, detail=f"unknown link {link_id!r}")
        try:
            payload = explain_link(
                state.graph,
                state.explainers,
                prediction.u,
                prediction.v,
                technique,
                config=state.config,
                model=state.model,
                features=state.features,
            )
        except NoPathEvidence:
            raise HTTPException(status_code=422, detail="no path evidence")
        except ExplainerUnavailable as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {
            "technique": technique,
            "link": {"u": prediction.u, "v": prediction.v, "link_id": link_id},
            "payload": payload,
            "generated_at": datetime.now(timezone.utc).isoformat(),
        }

    @app.post("/feedback", status_code=201)
    def post_feedback(request: FeedbackRequest):
        if request.technique not in TECHNIQUES:
            raise HTTPException(status_code=400, detail=f"unknown technique {request.technique!r}")
        if request.verdict not in ("agree", "disagree"):
            raise HTTPException(status_code=400, detail=f"unknown verdict {request.verdict!r}")
        if request.link_id not in state.predictions:
            raise HTTPException(status_code=400, detail=f"unknown link {request.link_id!r}")
        record = FeedbackRecord(
            link_id=request.link_id,
            technique=request.technique,
            annotator=request.annotator,
            verdict=request.verdict,
            timestamp=datetime.now(timezone.utc).isoformat(),
        )
        if not state.feedback.append(record):
            raise HTTPException(status_code=409, detail="verdict already recorded")
        return {"status": "recorded"}

    @app.get("/reports/agreement")
    def get_agreement_report():
        report = agreement_report(state.feedback.records())
        return report.to_record()

    return app
