"""Batch driver: ingest -> components -> split -> train -> predict -> explain
-> evaluate -> serve, each stage runnable on its own artifacts."""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import List, Optional

import click

from . import synthetic
from .evaluation import agreement_report, ingest_feedback, multi_seed_report, render_report
from .graph import GraphError, PropertyGraph, connected_components, load_graph
from .pipeline import (
    ExplainerUnavailable,
    NoPathEvidence,
    PipelineConfig,
    build_explainers,
    build_tasks,
    explain_link,
    run_seed,
    serving_features,
    train_model,
    watchlist_predictions,
)
from .predictor import Hyperparameters, LinkPrediction, ScorerModel, SubgraphTask, compute_position_features, train
from .sampler import LinkSample, SampleSplit, SamplerError, dump_samples, load_samples
from .verify import Document

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


class DataError(Exception):
    pass


def _read_lines(path: Path) -> List[str]:
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    return path.read_text().splitlines()


def _load_graph_files(nodes: Path, edges: Path) -> PropertyGraph:
    graph, _ = load_graph(_read_lines(nodes), _read_lines(edges))
    return graph


def _load_corpus(path: Path) -> List[Document]:
    docs = []
    for line in _read_lines(path):
        if line.strip():
            rec = json.loads(line)
            docs.append(Document(rec["doc_id"], rec.get("title", ""), rec["body"]))
    return docs


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _config(min_size, ratio, k, seed, epochs, learning_rate, threshold=0.5) -> PipelineConfig:
    return PipelineConfig(
        min_component_size=min_size,
        split_ratio=ratio,
        anchor_count=k,
        seed=seed,
        threshold=threshold,
        hyperparameters=Hyperparameters(
            learning_rate=learning_rate, epochs=epochs, seed=seed
        ),
    )


common_inputs = [
    click.option("--nodes", type=click.Path(path_type=Path), required=True),
    click.option("--edges", type=click.Path(path_type=Path), required=True),
]


def add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn

    return wrap


@click.group()
def cli():
    """Explainable link prediction pipeline."""


@cli.command()
@click.option("--out-dir", type=click.Path(path_type=Path), default=Path("fixtures"))
@click.option("--seed", type=int, default=42)
def fixtures(out_dir: Path, seed: int):
    """Write the bundled synthetic fixture inputs."""
    graph = synthetic.two_community_graph(seed=seed)
    node_lines, edge_lines = synthetic.graph_to_records(graph)
    _write(out_dir / "nodes.jsonl", "\n".join(node_lines) + "\n")
    _write(out_dir / "edges.jsonl", "\n".join(edge_lines) + "\n")
    _write(out_dir / "corpus.jsonl", "\n".join(synthetic.corpus_records(graph, seed=seed)) + "\n")
    _write(
        out_dir / "feedback_case_study.jsonl",
        "\n".join(synthetic.case_study_feedback_records()) + "\n",
    )
    watchlist = graph.node_ids[:3]
    _write(out_dir / "watchlist.txt", "\n".join(watchlist) + "\n")
    click.echo(f"fixtures written to {out_dir}")


@cli.command()
@add_options(common_inputs)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--min-size", type=int, default=10)
def ingest(nodes: Path, edges: Path, out: Path, min_size: int):
    """Validate the graph files and report component structure."""
    graph, report = load_graph(_read_lines(nodes), _read_lines(edges))
    components, filtered = connected_components(graph, min_size=min_size)
    doc = {
        "nodes": report.nodes,
        "edges": report.edges,
        "dropped_duplicates": report.dropped_duplicates,
        "components": [c.num_nodes() for c in components],
        "filtered_nodes": filtered,
        "min_component_size": min_size,
    }
    _write(out / "ingest_report.json", json.dumps(doc, sort_keys=True, indent=2) + "\n")
    click.echo(f"{report.nodes} nodes, {report.edges} edges, {len(components)} components")


@cli.command()
@add_options(common_inputs)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--min-size", type=int, default=10)
@click.option("--ratio", type=float, default=0.10)
@click.option("--seed", type=int, default=0)
def split(nodes: Path, edges: Path, out: Path, min_size: int, ratio: float, seed: int):
    """Per-component positive/negative sample files."""
    graph = _load_graph_files(nodes, edges)
    config = _config(min_size, ratio, 64, seed, 200, 0.1)
    _, tasks = build_tasks(graph, config)
    if not tasks:
        raise DataError(f"no components with at least {min_size} nodes")
    for i, task in enumerate(tasks):
        _write(out / "samples" / f"samples_{i:03d}.jsonl", "\n".join(dump_samples(task.split)) + "\n")
    click.echo(f"{len(tasks)} component sample files written")


@cli.command()
@add_options(common_inputs)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--samples-dir", type=click.Path(path_type=Path), default=None)
@click.option("--min-size", type=int, default=10)
@click.option("--k", type=int, default=64)
@click.option("--seed", type=int, default=0)
@click.option("--epochs", type=int, default=200)
@click.option("--learning-rate", type=float, default=0.1)
def train_cmd(nodes, edges, out, samples_dir, min_size, k, seed, epochs, learning_rate):
    """Train the scorer from split artifacts."""
    graph = _load_graph_files(nodes, edges)
    components, _ = connected_components(graph, min_size=min_size)
    samples_dir = samples_dir or out / "samples"
    sample_files = sorted(Path(samples_dir).glob("samples_*.jsonl"))
    if len(sample_files) != len(components):
        raise DataError(
            f"{len(sample_files)} sample files for {len(components)} components; rerun split"
        )
    tasks = []
    for component, sample_file in zip(components, sample_files):
        positives, negatives, sample_seed = load_samples(_read_lines(sample_file))
        training_graph = component.without_edges((s.u, s.v) for s in positives)
        features = compute_position_features(training_graph, k=k, seed=sample_seed)
        split_obj = SampleSplit(
            training_graph=training_graph, positives=positives, negatives=negatives, seed=sample_seed
        )
        tasks.append(SubgraphTask(graph=component, split=split_obj, features=features))
    hp = Hyperparameters(learning_rate=learning_rate, epochs=epochs, seed=seed)
    model = train(tasks, hp)
    _write(out / "model.json", model.to_json() + "\n")
    click.echo(f"model trained; final loss {model.training_log[-1]:.4f}")


@cli.command()
@add_options(common_inputs)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--model", "model_path", type=click.Path(path_type=Path), default=None)
@click.option("--watchlist", "watchlist_path", type=click.Path(path_type=Path), required=True)
@click.option("--threshold", type=float, default=0.5)
@click.option("--top-n", type=int, default=100)
def predict(nodes, edges, out, model_path, watchlist_path, threshold, top_n):
    """Score watchlist links and write the predictions file."""
    graph = _load_graph_files(nodes, edges)
    model_path = Path(model_path or out / "model.json")
    if not model_path.exists():
        raise DataError(f"model file not found: {model_path}")
    model = ScorerModel.from_json(model_path.read_text())
    watchlist = [w.strip() for w in _read_lines(watchlist_path) if w.strip()]
    config = PipelineConfig(anchor_count=model.k, seed=model.seed, threshold=threshold)
    features = serving_features(graph, config)
    predictions = watchlist_predictions(
        model, graph, features, watchlist, threshold=threshold, top_n=top_n
    )
    lines = [json.dumps(p.to_record(), sort_keys=True) for p in predictions]
    _write(out / "predictions.jsonl", "\n".join(lines) + ("\n" if lines else ""))
    click.echo(f"{len(predictions)} predictions written")


@cli.command()
@add_options(common_inputs)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--model", "model_path", type=click.Path(path_type=Path), default=None)
@click.option("--corpus", "corpus_path", type=click.Path(path_type=Path), required=True)
@click.option("--predictions", "predictions_path", type=click.Path(path_type=Path), default=None)
def explain(nodes, edges, out, model_path, corpus_path, predictions_path):
    """All three explanations for every stored prediction."""
    graph = _load_graph_files(nodes, edges)
    model = ScorerModel.from_json(Path(model_path or out / "model.json").read_text())
    predictions_path = predictions_path or out / "predictions.jsonl"
    predictions = [json.loads(l) for l in _read_lines(predictions_path) if l.strip()]
    corpus = _load_corpus(corpus_path)
    config = PipelineConfig(anchor_count=model.k, seed=model.seed)
    features = serving_features(graph, config)
    explainers = build_explainers(graph, model, features, config, corpus=corpus)
    lines = []
    for prediction in predictions:
        u, v = prediction["u"], prediction["v"]
        for technique in ("verification", "anchors", "path_ranking"):
            try:
                payload = explain_link(
                    graph, explainers, u, v, technique,
                    config=config, model=model, features=features,
                )
                record = {"technique": technique, "link": {"u": u, "v": v}, "payload": payload}
            except (NoPathEvidence, ExplainerUnavailable) as exc:
                record = {
                    "technique": technique,
                    "link": {"u": u, "v": v},
                    "payload": None,
                    "unavailable": str(exc),
                }
            lines.append(json.dumps(record, sort_keys=True))
    _write(out / "explanations.jsonl", "\n".join(lines) + ("\n" if lines else ""))
    click.echo(f"{len(lines)} explanation records written")


@cli.command(name="eval")
@add_options(common_inputs)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--seeds", default="0,1,2,3,4")
@click.option("--min-size", type=int, default=10)
@click.option("--ratio", type=float, default=0.10)
@click.option("--dataset-name", default="fixture")
@click.option("--feedback", "feedback_path", type=click.Path(path_type=Path), default=None)
def eval_cmd(nodes, edges, out, seeds, min_size, ratio, dataset_name, feedback_path):
    """Multi-seed AUC report, plus the agreement report when a log is given."""
    graph = _load_graph_files(nodes, edges)
    seed_list = [int(s) for s in seeds.split(",") if s.strip()]
    config = _config(min_size, ratio, 64, seed_list[0], 200, 0.1)
    report = multi_seed_report(
        lambda s: run_seed(graph, config, s), seed_list, dataset=dataset_name, model="position"
    )
    _write(out / "auc_report.txt", render_report(report) + "\n")
    _write(
        out / "auc_report.json",
        json.dumps(
            {
                "dataset": report.dataset,
                "model": report.model,
                "per_seed": {str(s): a for s, a in report.seed_aucs},
                "mean": report.mean,
                "std": report.std,
            },
            sort_keys=True,
            indent=2,
        )
        + "\n",
    )
    click.echo(render_report(report))
    if feedback_path:
        records = ingest_feedback(_read_lines(Path(feedback_path)))
        agreement = agreement_report(records)
        _write(out / "agreement_report.txt", agreement.render() + "\n")
        _write(
            out / "agreement_report.json",
            json.dumps(agreement.to_record(), sort_keys=True, indent=2) + "\n",
        )
        click.echo(agreement.render())


@cli.command()
@add_options(common_inputs)
@click.option("--model", "model_path", type=click.Path(path_type=Path), required=True)
@click.option("--corpus", "corpus_path", type=click.Path(path_type=Path), default=None)
@click.option("--predictions", "predictions_path", type=click.Path(path_type=Path), default=None)
@click.option("--feedback-log", type=click.Path(path_type=Path), default=Path("feedback.jsonl"))
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8800)
def serve(nodes, edges, model_path, corpus_path, predictions_path, feedback_log, host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import ServiceState, create_app

    graph = _load_graph_files(nodes, edges)
    model = ScorerModel.from_json(Path(model_path).read_text())
    corpus = _load_corpus(Path(corpus_path)) if corpus_path else None
    predictions = None
    if predictions_path:
        predictions = [
            LinkPrediction(**json.loads(l))
            for l in _read_lines(Path(predictions_path))
            if l.strip()
        ]
    state = ServiceState.build(
        graph, model, Path(feedback_log), corpus=corpus, predictions=predictions
    )
    uvicorn.run(create_app(state), host=host, port=port)


@cli.command()
@add_options(common_inputs)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--corpus", "corpus_path", type=click.Path(path_type=Path), required=True)
@click.option("--watchlist", "watchlist_path", type=click.Path(path_type=Path), required=True)
@click.option("--feedback", "feedback_path", type=click.Path(path_type=Path), default=None)
@click.option("--min-size", type=int, default=10)
@click.option("--ratio", type=float, default=0.10)
@click.option("--k", type=int, default=64)
@click.option("--seed", type=int, default=0)
@click.option("--seeds", default="0,1,2,3,4")
@click.option("--threshold", type=float, default=0.5)
@click.pass_context
def pipeline(ctx, nodes, edges, out, corpus_path, watchlist_path, feedback_path,
             min_size, ratio, k, seed, seeds, threshold):
    """Run every stage end to end into one output directory."""
    ctx.invoke(ingest, nodes=nodes, edges=edges, out=out, min_size=min_size)
    ctx.invoke(split, nodes=nodes, edges=edges, out=out, min_size=min_size, ratio=ratio, seed=seed)
    ctx.invoke(
        train_cmd, nodes=nodes, edges=edges, out=out, samples_dir=None,
        min_size=min_size, k=k, seed=seed, epochs=200, learning_rate=0.1,
    )
    ctx.invoke(
        predict, nodes=nodes, edges=edges, out=out, model_path=None,
        watchlist_path=watchlist_path, threshold=threshold, top_n=100,
    )
    ctx.invoke(
        explain, nodes=nodes, edges=edges, out=out, model_path=None,
        corpus_path=corpus_path, predictions_path=None,
    )
    ctx.invoke(
        eval_cmd, nodes=nodes, edges=edges, out=out, seeds=seeds, min_size=min_size,
        ratio=ratio, dataset_name="fixture", feedback_path=feedback_path,
    )
    click.echo(f"pipeline complete; artifacts in {out}")


cli.add_command(train_cmd, name="train")


def main(argv: Optional[List[str]] = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Abort:
        return EXIT_USAGE
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except (DataError, GraphError, SamplerError, FileNotFoundError, json.JSONDecodeError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"runtime error: {exc}", err=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
