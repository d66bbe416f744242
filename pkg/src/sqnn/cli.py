"""Command-line interface.

Exit codes: 0 success, 1 training/assertion failure, 2 usage error,
3 missing or unreadable data. The data directory for the real-dataset
recipes defaults to ./data and can be set with SQNN_DATA_DIR or
--data-dir.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import datasets, experiments, features, metrics, model_io, training

EXIT_FAILURE = 1
EXIT_IO = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _parse_label_map(text: str | None):
    if not text:
        return None
    mapping = {}
    for item in text.split(","):
        key, sep, value = item.partition(":")
        if not sep:
            raise click.UsageError(f"bad label-map entry {item!r}, expected NAME:VALUE")
        mapping[key.strip()] = float(value)
    return mapping


def _load_dataset(path, target_column, label_map, no_scale_targets, drop_cols):
    column = int(target_column) if target_column.lstrip("+-").isdigit() else target_column
    try:
        return datasets.load_csv(
            path, target_column=column, label_map=_parse_label_map(label_map),
            drop_cols=tuple(drop_cols),
            scale_targets=False if no_scale_targets else "auto")
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read {path}: {exc}")
    except ValueError as exc:
        _fail(EXIT_IO, str(exc))


def _write_rows(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" if isinstance(v, float) else str(v)
                              for v in row) + "\n")


data_option = click.option("--data", "data_path", required=True,
                           type=click.Path(exists=False), help="CSV dataset path.")
target_column_option = click.option("--target-column", default="-1", show_default=True,
                                    help="Target column index or header name.")
label_map_option = click.option("--label-map", default=None,
                                help="Categorical target mapping, e.g. 'M:1,B:-1'.")
drop_cols_option = click.option("--drop-col", "drop_cols", multiple=True, type=int,
                                help="Column index to drop (repeatable).")
no_scale_option = click.option("--no-scale-targets", is_flag=True,
                               help="Fail instead of rescaling out-of-range targets.")


@click.group()
def main():
    """Single-qubit network trainer and experiment harness."""


@main.command("gen")
@click.argument("dataset_name")
@click.option("--n", default=1000, show_default=True, type=click.IntRange(min=2),
              help="Sample count (two-moons).")
@click.option("--noise", default=0.07, show_default=True, type=click.FloatRange(min=0),
              help="Noise level (two-moons).")
@click.option("--n-train", default=800, show_default=True, type=click.IntRange(min=1))
@click.option("--n-val", default=100, show_default=True, type=click.IntRange(min=1))
@click.option("--n-test", default=100, show_default=True, type=click.IntRange(min=1))
@click.option("--noise-sigma", default=0.0, show_default=True, type=click.FloatRange(min=0),
              help="Target noise level (sinc).")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Output CSV path (default <name>.csv).")
def cmd_gen(dataset_name, n, noise, n_train, n_val, n_test, noise_sigma, seed, out_path):
    """Write a synthetic dataset (logic gate, 'sinc' or 'two-moons') as CSV.

    The sinc generator writes three files with -train/-val/-test suffixes.
    """
    name = dataset_name.lower()
    out = Path(out_path) if out_path else Path(f"{name}.csv")
    try:
        if name == "sinc":
            parts = datasets.gen_sinc(n_train=n_train, n_val=n_val, n_test=n_test,
                                      noise_sigma=noise_sigma, seed=seed)
            for part, ds in zip(("train", "val", "test"), parts):
                path = out.with_name(f"{out.stem}-{part}{out.suffix or '.csv'}")
                _write_rows(path, ["x", "y"],
                            [(float(x[0]), float(y)) for x, y in zip(ds.inputs, ds.targets)])
                click.echo(f"wrote {path} ({ds.n} rows)")
            return
        if name == "two-moons":
            ds = datasets.gen_two_moons(n=n, noise=noise, seed=seed)
        elif name.upper() in datasets.LOGIC_GATES:
            ds = datasets.gen_logic_gate(name)
        else:
            raise click.UsageError(
                f"unknown dataset {dataset_name!r}; expected 'sinc', 'two-moons' "
                f"or a gate name {sorted(datasets.LOGIC_GATES)}")
        header = [f"x{j + 1}" for j in range(ds.p)] + ["y"]
        _write_rows(out, header,
                    [tuple(map(float, row)) + (float(y),)
                     for row, y in zip(ds.inputs, ds.targets)])
        click.echo(f"wrote {out} ({ds.n} rows)")
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write: {exc}")


def _trainer_kind(method: str) -> tuple[str, str]:
    """Map a --method value to (trainer, model_shape)."""
    method = method.lower()
    if method == "lls":
        return "lls", ""
    if method in ("gd", "gd-full"):
        return "gd", "full"
    if method == "gd-reduced":
        return "gd", "reduced"
    raise click.UsageError(f"unknown method {method!r}; "
                           "expected lls, gd, gd-full or gd-reduced")


@main.command("train")
@data_option
@target_column_option
@label_map_option
@drop_cols_option
@no_scale_option
@click.option("--method", default="lls", show_default=True,
              help="lls, gd (five-angle network), gd-full or gd-reduced.")
@click.option("--K", "k_degree", default=1, show_default=True, type=click.IntRange(min=1),
              help="Polynomial degree / neuron count.")
@click.option("--lr", default=0.05, show_default=True, type=click.FloatRange(min=0, min_open=True))
@click.option("--max-epochs", default=500, show_default=True, type=click.IntRange(min=1))
@click.option("--target-loss", default=0.0, show_default=True, type=click.FloatRange(min=0))
@click.option("--init-scale", default=0.1, show_default=True, type=click.FloatRange(min=0))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--loss", default="mse", show_default=True,
              type=click.Choice(["mse", "hinge"]))
@click.option("--no-normalize", is_flag=True, help="Skip input min-max scaling.")
@click.option("--rcond", default=None, type=float, help="LLS truncation threshold.")
@click.option("--out", "model_path", required=True, type=click.Path(),
              help="Where to write the trained model.")
@click.option("--loss-curve", default=None, type=click.Path(),
              help="Write per-epoch loss values as CSV (gd only).")
def cmd_train(data_path, target_column, label_map, drop_cols, no_scale_targets,
              method, k_degree, lr, max_epochs, target_loss, init_scale, seed,
              loss, no_normalize, rcond, model_path, loss_curve):
    """Fit a model on a CSV dataset and save it."""
    data = _load_dataset(data_path, target_column, label_map, no_scale_targets, drop_cols)
    trainer, shape = _trainer_kind(method)
    if trainer == "lls":
        config = training.LlsConfig(K=k_degree, rcond=rcond, normalize=not no_normalize)
        model = training.lls_train(data, config)
        scaled = (model.normalization.apply_features(data.inputs)
                  if model.normalization is not None else data.inputs)
        design = features.build_design_matrix(scaled, k_degree)
        rhs = training.arctanh_labels(data.targets, config.epsilon)
        residual = float(np.mean((design @ model.beta.flat() - rhs) ** 2))
        click.echo(f"lls fit: residual (arctanh space) = {residual:.6g}, "
                   f"training mse = {training.mse_loss(model.predict(data.inputs), data.targets):.6g}")
    else:
        config = training.GdConfig(learning_rate=lr, max_epochs=max_epochs,
                                   target_loss=target_loss, seed=seed,
                                   init_scale=init_scale, K=k_degree, loss=loss,
                                   normalize=not no_normalize)
        try:
            model, history = training.gd_train(data, config, model_shape=shape)
        except training.TrainingDiverged as exc:
            _fail(EXIT_FAILURE, str(exc))
        click.echo(f"gd fit ({shape}): final {loss} = {history[-1]:.6g} "
                   f"after {len(history)} epoch(s)")
        if loss_curve:
            _write_rows(loss_curve, ["epoch", "loss"],
                        list(enumerate(map(float, history), start=1)))
            click.echo(f"wrote {loss_curve}")
    try:
        model_io.save(model, model_path)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write model: {exc}")
    click.echo(f"saved model to {model_path}")


def _echo_metrics(rows, fmt):
    if fmt == "csv":
        click.echo("metric,value")
        for name, value in rows:
            click.echo(f"{name},{value:.6f}")
    else:
        width = max(len(name) for name, _ in rows)
        for name, value in rows:
            click.echo(f"{name:<{width}}  {value:.6f}")


@main.command("eval")
@click.option("--model", "model_path", required=True, type=click.Path())
@data_option
@target_column_option
@label_map_option
@drop_cols_option
@no_scale_option
@click.option("--task", default="classification", show_default=True,
              type=click.Choice(["regression", "classification"]))
@click.option("--format", "fmt", default="table", show_default=True,
              type=click.Choice(["table", "csv"]))
@click.option("--boundary", default=None, type=click.Path(),
              help="For 2-feature models: write a prediction grid CSV.")
@click.option("--resolution", default=100, show_default=True, type=click.IntRange(min=2))
def cmd_eval(model_path, data_path, target_column, label_map, drop_cols,
             no_scale_targets, task, fmt, boundary, resolution):
    """Evaluate a saved model on a CSV dataset."""
    try:
        model = model_io.load(model_path)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read model: {exc}")
    except (model_io.UnsupportedFormat, model_io.ModelFormatError) as exc:
        _fail(EXIT_IO, f"bad model file: {exc}")
    data = _load_dataset(data_path, target_column, label_map, no_scale_targets, drop_cols)
    if data.p != model.p:
        _fail(EXIT_FAILURE, f"dimension mismatch: model expects p={model.p} features "
                            f"but dataset has p={data.p}")
    try:
        if task == "regression":
            rows = [("mse", training.mse_loss(model.predict(data.inputs), data.targets))]
        else:
            report = metrics.metric_suite(metrics.confusion(
                model.predict_class(data.inputs), data.targets))
            rows = list(report.as_dict().items())
            for name in sorted(report.undefined):
                click.echo(f"note: {name} had a zero denominator and is reported as 0",
                           err=True)
    except ValueError as exc:
        _fail(EXIT_FAILURE, str(exc))
    _echo_metrics(rows, fmt)
    if boundary:
        if model.p != 2:
            raise click.UsageError("--boundary requires a 2-feature model")
        lo = data.inputs.min(axis=0)
        hi = data.inputs.max(axis=0)
        xs = np.linspace(lo[0], hi[0], resolution)
        ys = np.linspace(lo[1], hi[1], resolution)
        grid_rows = []
        for gy in ys:
            points = np.column_stack([xs, np.full_like(xs, gy)])
            preds = model.predict(points)
            grid_rows += [(float(gx), float(gy), float(pv)) for gx, pv in zip(xs, preds)]
        _write_rows(boundary, ["x1", "x2", "prediction"], grid_rows)
        click.echo(f"wrote {boundary}")


@main.command("crossval")
@data_option
@target_column_option
@label_map_option
@drop_cols_option
@no_scale_option
@click.option("--method", default="lls", show_default=True)
@click.option("--K", "k_degree", default=1, show_default=True, type=click.IntRange(min=1))
@click.option("--lr", default=0.05, show_default=True, type=click.FloatRange(min=0, min_open=True))
@click.option("--max-epochs", default=500, show_default=True, type=click.IntRange(min=1))
@click.option("--target-loss", default=0.0, show_default=True, type=click.FloatRange(min=0))
@click.option("--init-scale", default=0.1, show_default=True, type=click.FloatRange(min=0))
@click.option("--loss", default="mse", show_default=True, type=click.Choice(["mse", "hinge"]))
@click.option("--no-normalize", is_flag=True)
@click.option("--task", default="classification", show_default=True,
              type=click.Choice(["regression", "classification"]))
@click.option("--k", "k_folds", default=10, show_default=True, type=click.IntRange(min=2))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--format", "fmt", default="table", show_default=True,
              type=click.Choice(["table", "csv"]))
def cmd_crossval(data_path, target_column, label_map, drop_cols, no_scale_targets,
                 method, k_degree, lr, max_epochs, target_loss, init_scale, loss,
                 no_normalize, task, k_folds, seed, fmt):
    """k-fold cross-validation; prints mean and std per metric."""
    data = _load_dataset(data_path, target_column, label_map, no_scale_targets, drop_cols)
    trainer, shape = _trainer_kind(method)
    if k_folds > data.n:
        raise click.UsageError(f"--k {k_folds} exceeds the dataset size n={data.n}")
    if trainer == "lls":
        config = training.LlsConfig(K=k_degree, normalize=not no_normalize)
    else:
        config = training.GdConfig(learning_rate=lr, max_epochs=max_epochs,
                                   target_loss=target_loss, seed=seed,
                                   init_scale=init_scale, K=k_degree, loss=loss,
                                   normalize=not no_normalize)
    try:
        summary = metrics.crossval(data, trainer=trainer, config=config,
                                   model_shape=shape or "reduced", task=task,
                                   k=k_folds, seed=seed)
    except (training.TrainingDiverged, ValueError) as exc:
        _fail(EXIT_FAILURE, str(exc))
    if fmt == "csv":
        click.echo("metric,mean,std")
        for name in sorted(summary):
            s = summary[name]
            click.echo(f"{name},{s.mean:.6f},{s.std:.6f}")
    else:
        width = max(len(name) for name in summary)
        for name in sorted(summary):
            s = summary[name]
            click.echo(f"{name:<{width}}  {s.mean:.6f} +- {s.std:.6f}")


@main.command("recipes")
def cmd_recipes():
    """List the named experiment recipes."""
    for name in experiments.available_recipes():
        click.echo(name)


@main.command("reproduce")
@click.argument("recipe_name")
@click.option("--data-dir", default=None, type=click.Path(),
              help="Data directory (default $" + experiments.DATA_DIR_ENV + " or ./data).")
@click.option("--pair", nargs=2, type=int, default=None,
              help="Restrict the MNIST recipe to one digit pair.")
@click.option("--dct-keep", default=None, type=click.IntRange(min=1),
              help="Keep only the top-left BxB DCT block (MNIST recipe).")
def cmd_reproduce(recipe_name, data_dir, pair, dct_keep):
    """Run a named experiment recipe and check its expected bounds."""
    try:
        result = experiments.run_recipe(recipe_name, data_dir=data_dir,
                                        pair=pair or None, dct_keep=dct_keep,
                                        log=click.echo)
    except experiments.MissingData as exc:
        _fail(EXIT_IO, str(exc))
    except ValueError as exc:
        raise click.UsageError(str(exc))
    for line in result.report_lines():
        click.echo(line)
    if not result.passed:
        _fail(EXIT_FAILURE, f"recipe {recipe_name} failed "
              f"{sum(not a.passed for a in result.assertions)} assertion(s)")
    click.echo(f"recipe {recipe_name}: all {len(result.assertions)} assertion(s) passed")


@main.command("fetch")
@click.argument("dataset", type=click.Choice([*experiments.DATASET_SOURCES, "all"]))
@click.option("--data-dir", default=None, type=click.Path())
def cmd_fetch(dataset, data_dir):
    """Download (or locally materialize) the real datasets.

    `wdbc` is materialized from scikit-learn's bundled copy of the same
    UCI data when scikit-learn is installed, so it works offline.
    """
    directory = experiments.resolve_data_dir(data_dir)
    directory.mkdir(parents=True, exist_ok=True)
    names = list(experiments.DATASET_SOURCES) if dataset == "all" else [dataset]
    failures = 0
    for name in names:
        failures += 0 if _fetch_one(name, directory) else 1
    if failures:
        _fail(EXIT_IO, f"{failures} dataset(s) could not be fetched")


def _fetch_one(name: str, directory: Path) -> bool:
    source = experiments.DATASET_SOURCES[name]
    targets = [directory / f for f in source["files"]]
    if all(t.exists() for t in targets):
        click.echo(f"{name}: already present in {directory}")
        return True
    if name == "wdbc" and experiments.materialize_wdbc(targets[0]):
        click.echo(f"wdbc: wrote {targets[0]} from scikit-learn's bundled copy")
        return True
    ok = True
    for url in source["urls"]:
        ok = _download(url, directory) and ok
    missing = [t.name for t in targets if not t.exists()]
    if missing:
        click.echo(f"{name}: still missing {', '.join(missing)}; {source['note']}", err=True)
        return False
    return ok


def _download(url: str, directory: Path) -> bool:
    import urllib.request
    from urllib.parse import unquote, urlparse

    filename = unquote(Path(urlparse(url).path).name)
    dest = directory / filename
    try:
        click.echo(f"downloading {url}")
        urllib.request.urlretrieve(url, dest)
    except OSError as exc:
        click.echo(f"download failed: {exc}", err=True)
        return False
    if dest.suffix == ".zip":
        import zipfile
        with zipfile.ZipFile(dest) as zf:
            zf.extractall(directory)
        click.echo(f"extracted {dest.name}")
    return True


if __name__ == "__main__":
    main()
