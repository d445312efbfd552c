"""
Command line entry point: filter images, export kernels, run the timing benchmark.

    python -m app.cli.main filter --in in.pgm --out out.pgm --mode bilateral --T 5 --sigma-r 40
    python -m app.cli.main kernel --type directional --N 4 --T 64 --metrics
    python -m app.cli.main bench --size 512 --T-list 2,4,8,16 --runs 5
"""
import json
import math
import logging
from typing import Optional

import click

from models.config import FilterMode, KernelFamily, ShiftConfig
from models.image import ImageBuffer
from app.cli.bench import run_bench
from app.core.filters import (
    BilateralConfig,
    bilateral_filter_direct,
    bilateral_filter_shiftable,
    max_relative_deviation,
    spatial_filter_direct,
    spatial_filter_shiftable,
)
from app.core.gaussian_fit import (
    KernelValidityError,
    fit_gaussian_polynomial,
    fit_gaussian_raised_cosine,
)
from app.core.expansions import polynomial_expansion, raised_cosine_expansion, truncate_expansion
from app.core.kernels import (
    MAX_EXPANDED_DIRECTIONS,
    Box,
    PolyWindow,
    RaisedCosine,
    Separable2D,
    corner_overshoot,
    directional_kernel,
    directional_limit_gaussian,
    expansion_for_spec,
    four_direction_kernel,
    isotropy_metric,
    sup_distance,
)
from app.core.nlm import nlm_direct, nlm_shiftable_experimental, patch_offsets, patch_weights
from utils.image_io import PgmError, read_pgm, write_expansion_csv, write_json_report, write_pgm

logger = logging.getLogger(__name__)

EXIT_IO = 3
EXIT_KERNEL = 4

DEFAULT_REPORT_PATH = "data/processed/bench_report.json"


def _fail(ctx: click.Context, message: str, code: int) -> None:
    logger.error(message)
    click.echo(f"Error: {message}", err=True)
    ctx.exit(code)


def _threads(threads: Optional[int]) -> int:
    return threads if threads is not None else ShiftConfig.load_config()["threads"]


@click.group()
@click.option("--verbose", is_flag=True, help="Log at DEBUG level.")
def cli(verbose: bool):
    """Constant-time shiftable-kernel filtering."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _fit_1d(family: KernelFamily, sigma: float, T: float, order: Optional[int], epsilon: float, force: bool):
    if family is KernelFamily.POLY:
        return fit_gaussian_polynomial(sigma, T, epsilon, order=order, force=force)
    return fit_gaussian_raised_cosine(sigma, T, epsilon, order=order, force=force)


def _spatial_kernel(family: KernelFamily, T: int, sigma_s: Optional[float], order_s: Optional[int], force: bool):
    """Spatial kernel spec on [-T, T]^2 from the command line options (spatial kernels are never truncated)"""
    if T == 0 or (sigma_s is None and order_s is None):
        return Box(T)
    if family is KernelFamily.DIRECTIONAL:
        if sigma_s is not None:
            # per-direction scale whose limiting Gaussian has width sigma_s
            N = order_s or 4
            return directional_kernel(N, T, scale=4.0 * T / (math.pi * sigma_s * math.sqrt(2.0 * N)))
        return directional_kernel(order_s, T)
    if sigma_s is not None:
        fit = _fit_1d(family, sigma_s, T, order_s, 0.0, force)
        return Separable2D(fit.spec, fit.spec)
    one_d = PolyWindow(order_s, T) if family is KernelFamily.POLY else RaisedCosine(order_s, T)
    return Separable2D(one_d, one_d)


def _range_expansion(family: KernelFamily, sigma_r: Optional[float], order_r: Optional[int],
                     epsilon: float, force: bool):
    T_r = ShiftConfig.load_config()["range_halfwidth"]
    if family is KernelFamily.DIRECTIONAL:
        family = KernelFamily.COSINE
    if sigma_r is not None:
        fit = _fit_1d(family, sigma_r, T_r, order_r, epsilon, force)
        name = "raised-cosine" if family is KernelFamily.COSINE else "polynomial"
        logger.info(f"Range kernel: {name} N={fit.N} (sigma_r={sigma_r}, T_r={T_r}, "
                    f"sup_error={fit.sup_error:.3e})")
        return fit.expansion
    if family is KernelFamily.POLY:
        expansion = polynomial_expansion(order_r, T_r)
    else:
        expansion = raised_cosine_expansion(order_r, T_r)
    logger.info(f"Range kernel: order {order_r} on [-{T_r}, {T_r}]")
    return truncate_expansion(expansion, epsilon)


@cli.command("filter")
@click.option("--in", "input_path", required=True, type=click.Path(dir_okay=False), help="Input PGM.")
@click.option("--out", "output_path", required=True, type=click.Path(dir_okay=False), help="Output PGM.")
@click.option("--mode", type=click.Choice([m.value for m in FilterMode]), default=FilterMode.SPATIAL.value)
@click.option("--T", "radius", required=True, type=click.IntRange(min=0), help="Window radius in pixels.")
@click.option("--sigma-s", type=click.FloatRange(min=0, min_open=True), default=None)
@click.option("--sigma-r", type=click.FloatRange(min=0, min_open=True), default=None)
@click.option("--order-s", type=click.IntRange(min=0), default=None)
@click.option("--order-r", type=click.IntRange(min=0), default=None)
@click.option("--trunc", type=click.FloatRange(min=0, max=1, max_open=True), default=0.0,
              help="Truncation tolerance for the expansions.")
@click.option("--kernel", "family", type=click.Choice(["cosine", "poly", "directional"]), default="cosine")
@click.option("--patch", type=click.IntRange(1, ShiftConfig.MAX_PATCH_SIZE), default=2, help="NLM patch size p.")
@click.option("--h", "h", type=click.FloatRange(min=0, min_open=True), default=30.0, help="NLM smoothing parameter.")
@click.option("--sigma-patch", type=click.FloatRange(min=0, min_open=True), default=1.0)
@click.option("--oracle", is_flag=True, help="Also run the brute-force path and print the deviation.")
@click.option("--force", is_flag=True, help="Accept orders below the validity threshold.")
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker cap (SHIFTKERN_THREADS).")
@click.pass_context
def filter_command(ctx, input_path, output_path, mode, radius, sigma_s, sigma_r, order_s, order_r, trunc,
                   family, patch, h, sigma_patch, oracle, force, threads):
    """Filter a PGM image with a constant-time shiftable filter."""
    mode = FilterMode(mode)
    family = KernelFamily(family)
    threads = _threads(threads)

    try:
        image = read_pgm(input_path)
    except (OSError, PgmError) as e:
        _fail(ctx, f"cannot read {input_path}: {e}", EXIT_IO)

    try:
        result, reference = _run_filter(mode, image, radius, family, sigma_s, sigma_r, order_s, order_r,
                                        trunc, patch, h, sigma_patch, oracle, force, threads)
    except KernelValidityError as e:
        _fail(ctx, str(e), EXIT_KERNEL)
    except ValueError as e:
        raise click.UsageError(str(e))

    if reference is not None:
        click.echo(f"max relative deviation: {max_relative_deviation(result, reference):.3e}")

    try:
        write_pgm(result, output_path)
    except OSError as e:
        _fail(ctx, f"cannot write {output_path}: {e}", EXIT_IO)


def _run_filter(mode, image, T, family, sigma_s, sigma_r, order_s, order_r, trunc, patch, h, sigma_patch,
                oracle, force, threads):
    reference: Optional[ImageBuffer] = None

    if mode is FilterMode.NLM:
        n = order_r if order_r is not None else 3
        offsets = patch_offsets(patch)
        weights = patch_weights(offsets, sigma_patch)
        range_halfwidth = ShiftConfig.load_config()["range_halfwidth"]
        result = nlm_shiftable_experimental(image, offsets, h, weights, T, n, range_halfwidth=range_halfwidth,
                                            threads=threads)
        click.echo(f"kernel gap: {result.kernel_gap:.3e} ({result.order} terms)")
        if oracle:
            reference = nlm_direct(image, offsets, h, weights, T, n, range_halfwidth=range_halfwidth)
        return result.image, reference

    spatial = _spatial_kernel(family, T, sigma_s, order_s, force)
    if mode is FilterMode.SPATIAL:
        result = spatial_filter_shiftable(image, spatial, T, threads=threads)
        if oracle:
            reference = spatial_filter_direct(image, spatial, T)
        return result, reference

    if sigma_r is None and order_r is None:
        raise ValueError("bilateral mode needs --sigma-r or --order-r")
    config = BilateralConfig(spatial, _range_expansion(family, sigma_r, order_r, trunc, force), T,
                             ShiftConfig.load_config()["eta_floor"])
    result = bilateral_filter_shiftable(image, config, threads)
    if oracle:
        reference = bilateral_filter_direct(image, config)
    return result, reference


def _kernel_spec(kernel_type: str, N: int, T: float, sigma: Optional[float], scale: str,
                 epsilon: float, force: bool):
    """Returns (spec, fit) for the kernel command"""
    if kernel_type == "directional":
        if N == 4 and scale == "unit":
            return four_direction_kernel(T), None
        return directional_kernel(N, T, scale=1.0 if scale == "unit" else None), None

    family = KernelFamily.POLY if kernel_type == "poly" else KernelFamily.COSINE
    fit = None
    if sigma is not None:
        fit = _fit_1d(family, sigma, T, N, epsilon, force)
        one_d = fit.spec
    else:
        one_d = PolyWindow(N, T) if family is KernelFamily.POLY else RaisedCosine(N, T)
    if kernel_type == "separable":
        return Separable2D(one_d, one_d), fit
    return one_d, fit


@cli.command("kernel")
@click.option("--type", "kernel_type", type=click.Choice(ShiftConfig.get_family_choices()),
              required=True)
@click.option("--N", "N", type=click.IntRange(min=0), required=True, help="Kernel order.")
@click.option("--T", "T", type=click.FloatRange(min=0, min_open=True), default=128.0, help="Half-width.")
@click.option("--sigma", type=click.FloatRange(min=0, min_open=True), default=None,
              help="Fit a Gaussian of this width at order N.")
@click.option("--scale", type=click.Choice(["unit", "gaussian"]), default="unit",
              help="Directional per-direction scale: 1, or sqrt(6/N).")
@click.option("--trunc", type=click.FloatRange(min=0, max=1, max_open=True), default=0.0)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="Expansion CSV output.")
@click.option("--metrics", is_flag=True, help="Print quality metrics as JSON.")
@click.option("--json", "json_path", type=click.Path(dir_okay=False), default=None, help="Write metrics JSON.")
@click.option("--force", is_flag=True, help="Accept orders below the validity threshold.")
@click.pass_context
def kernel_command(ctx, kernel_type, N, T, sigma, scale, trunc, csv_path, metrics, json_path, force):
    """Export a kernel expansion and its quality metrics."""
    try:
        spec, fit = _kernel_spec(kernel_type, N, T, sigma, scale, trunc, force)
        if fit is not None:
            expansion = fit.expansion
        elif kernel_type == "directional" and spec.N > MAX_EXPANDED_DIRECTIONS and csv_path is None:
            # metrics evaluate the closed form; plane waves are only enumerated up to the cap
            expansion = None
        else:
            expansion = expansion_for_spec(spec)
            if kernel_type in ("cosine", "poly"):
                expansion = truncate_expansion(expansion, trunc)
    except KernelValidityError as e:
        _fail(ctx, str(e), EXIT_KERNEL)
    except ValueError as e:
        raise click.UsageError(str(e))

    if csv_path is not None:
        exported = expansion.kx if kernel_type == "separable" else expansion
        try:
            write_expansion_csv(exported, csv_path)
        except OSError as e:
            _fail(ctx, f"cannot write {csv_path}: {e}", EXIT_IO)

    if metrics or json_path is not None:
        report = _kernel_metrics(kernel_type, spec, fit, expansion)
        if metrics:
            click.echo(json.dumps(report, indent=4))
        if json_path is not None:
            try:
                write_json_report(report, json_path)
            except OSError as e:
                _fail(ctx, f"cannot write {json_path}: {e}", EXIT_IO)


def _kernel_metrics(kernel_type, spec, fit, expansion) -> dict:
    if kernel_type in ("cosine", "poly"):
        planar = Separable2D(spec, spec)
    else:
        planar = spec

    error = None
    if fit is not None:
        error = fit.sup_error
    elif kernel_type == "directional" and spec.N >= 2:
        error = sup_distance(planar, directional_limit_gaussian(planar))

    return {
        "sup_error": error,
        "isotropy": isotropy_metric(planar),
        "corner_overshoot": corner_overshoot(planar),
        "terms": expansion.order if expansion is not None else None,
    }


@cli.command("bench")
@click.option("--size", type=click.IntRange(min=1), default=512)
@click.option("--T-list", "t_list", default="2,4,8,16", help="Comma-separated window radii.")
@click.option("--runs", type=click.IntRange(min=1), default=5)
@click.option("--direct", is_flag=True, help="Also time the brute-force filter.")
@click.option("--sigma-r", type=click.FloatRange(min=0, min_open=True), default=40.0)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=DEFAULT_REPORT_PATH)
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker cap (SHIFTKERN_THREADS).")
@click.pass_context
def bench_command(ctx, size, t_list, runs, direct, sigma_r, report_path, threads):
    """Time the shiftable bilateral filter across window radii."""
    try:
        T_values = [int(v) for v in t_list.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {t_list!r}", param_hint="--T-list")
    if not T_values or any(T < 0 for T in T_values):
        raise click.BadParameter("need at least one non-negative radius", param_hint="--T-list")

    report = run_bench(size, T_values, runs, direct, sigma_r, _threads(threads))
    try:
        write_json_report(report.to_dict(), report_path)
    except OSError as e:
        _fail(ctx, f"cannot write {report_path}: {e}", EXIT_IO)

    click.echo(f"shiftable spread {report.shiftable_spread:.3f} "
               f"({'constant time' if report.constant_time else 'NOT constant time'}); report: {report_path}")


if __name__ == "__main__":
    cli()
