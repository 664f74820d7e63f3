"""``dcart`` command line: phantoms, projection, noise, reconstruction, metrics."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from . import io as dio
from .config import RunConfig, load_config
from .errors import ConfigError, DcartError
from .geometry import SystemGeometry, default_n_phi, n_rho_from_q
from .harmonics import consistency_residuals, decompose_phi, regularized_G
from .image import ImageGrid, default_center
from .inversion import EXTERIOR_MODES, reconstruct
from .metrics import MetricsReport, add_noise, evaluate
from .parallel import ENV_VAR, set_threads
from .phantom import PHANTOMS, make_phantom
from .projector import project

log = logging.getLogger("dcart")


def _pair(text: str) -> tuple[float, float]:
    try:
        x, y = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}") from None
    return x, y


def _write_report(path: str, payload: dict | MetricsReport) -> None:
    json_out = path.endswith(".json")
    if isinstance(payload, MetricsReport):
        text = payload.to_json() + "\n" if json_out else payload.to_text()
    elif json_out:
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = "".join(" ".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}"
                                for k, v in row.items()) + "\n" for row in payload["residuals"])
    dio.ensure_dir(os.path.dirname(path))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def cmd_phantom(args) -> None:
    if args.center is None:
        if args.R is None:
            raise ConfigError("center", "give --center, or --R to place the grid just outside the detector")
        center = default_center(args.n, args.R, args.pixel_size)
    else:
        center = args.center
    grid = ImageGrid(args.n, args.pixel_size, center)
    log.info("resolved: %s", json.dumps(dict(kind=args.kind, n=args.n, pixel_size=args.pixel_size,
                                             center=list(grid.center), out=args.out)))
    dio.write_image(args.out, make_phantom(args.kind, grid))


def cmd_project(args) -> None:
    image = dio.read_image(args.image)
    n_phi = args.n_phi if args.n_phi is not None else default_n_phi(args.R)
    if args.q is not None:
        n_rho = n_rho_from_q(args.q, image.grid.N, n_phi)
    else:
        n_rho = args.n_rho
    geometry = SystemGeometry(args.R, args.rho_max, n_rho, n_phi, args.arc_step)
    log.info("resolved: %s", json.dumps(dict(image=args.image, R=args.R, rho_max=args.rho_max, q=args.q,
                                             N_rho=n_rho, N_phi=n_phi, arc_step=args.arc_step,
                                             unsafe=args.unsafe, out=args.out)))
    dio.write_sinogram(args.out, project(image, geometry, unsafe=args.unsafe))


def cmd_add_noise(args) -> None:
    sino = dio.read_sinogram(args.sinogram)
    log.info("resolved: %s", json.dumps(dict(sinogram=args.sinogram, snr_db=args.snr_db,
                                             seed=args.seed, out=args.out)))
    dio.write_sinogram(args.out, add_noise(sino, args.snr_db, args.seed))


def cmd_reconstruct(args) -> None:
    sino = dio.read_sinogram(args.sinogram, epsilon=args.epsilon)
    R = sino.geometry.R
    center = args.center if args.center is not None else default_center(args.grid_n, R, args.pixel_size)
    grid = ImageGrid(args.grid_n, args.pixel_size, center)
    log.info("resolved: %s", json.dumps(dict(sinogram=args.sinogram, grid_n=args.grid_n,
                                             pixel_size=args.pixel_size, center=list(grid.center),
                                             epsilon=args.epsilon, exterior=args.exterior, out=args.out)))
    dio.write_image(args.out, reconstruct(sino, grid, args.epsilon, args.exterior))


def cmd_metrics(args) -> None:
    recon = dio.read_image(args.recon)
    truth = dio.read_image(args.truth)
    sino = dio.read_sinogram(args.sinogram, epsilon=args.epsilon) if args.sinogram else None
    log.info("resolved: %s", json.dumps(dict(recon=args.recon, truth=args.truth, sinogram=args.sinogram,
                                             epsilon=args.epsilon, out=args.out)))
    _write_report(args.out, evaluate(recon, truth, sino))


def cmd_consistency(args) -> None:
    sino = dio.read_sinogram(args.sinogram, epsilon=args.epsilon)
    log.info("resolved: %s", json.dumps(dict(sinogram=args.sinogram, n_max=args.n_max,
                                             epsilon=args.epsilon, tail=args.tail, out=args.out)))
    orders = [s * n for n in range(1, args.n_max + 1) for s in (1, -1)]
    G = regularized_G(decompose_phi(sino), args.epsilon, orders=orders)
    rows = [dict(n=r.n, k=r.k, residual=r.residual) for r in consistency_residuals(G, args.n_max, args.tail)]
    _write_report(args.out, {"epsilon": args.epsilon, "tail": args.tail, "residuals": rows})


def run_pipeline(config: RunConfig) -> MetricsReport:
    """Phantom, projection, optional noise, reconstruction and metrics for one config."""
    geometry = config.system_geometry()
    grid = config.image_grid()
    out = config.output_dir
    dio.ensure_dir(out)
    t0 = time.perf_counter()
    truth = make_phantom(config.phantom, grid)
    sino = project(truth, geometry)
    log.info("projected %dx%d sinogram in %.2fs", geometry.n_rho, geometry.n_phi, time.perf_counter() - t0)
    dio.write_image(os.path.join(out, "phantom.dcim"), truth)
    dio.write_sinogram(os.path.join(out, "sinogram.dcsg"), sino)
    if config.snr_db is not None:
        sino = add_noise(sino, config.snr_db, config.seed)
        dio.write_sinogram(os.path.join(out, "sinogram_noisy.dcsg"), sino)
    t1 = time.perf_counter()
    recon = reconstruct(sino, grid, geometry.epsilon, config.exterior)
    log.info("reconstructed in %.2fs", time.perf_counter() - t1)
    dio.write_image(os.path.join(out, "recon.dcim"), recon)
    dio.write_pgm(os.path.join(out, "phantom.pgm"), truth)
    dio.write_pgm(os.path.join(out, "recon.pgm"), recon)
    dio.write_pgm(os.path.join(out, "sinogram.pgm"), sino, flip=False)
    report = evaluate(recon, truth, sino, phantom=config.phantom, snr_db=config.snr_db, seed=config.seed)
    _write_report(os.path.join(out, "report.json"), report)
    _write_report(os.path.join(out, "report.txt"), report)
    return report


def cmd_pipeline(args) -> None:
    config = load_config(args.config)
    if args.output_dir is not None:
        config.output_dir = args.output_dir
    log.info("resolved: %s", json.dumps(config.resolved_dict()))
    report = run_pipeline(config)
    sys.stdout.write(report.to_text())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dcart", description="Double circular arc Radon transform toolkit.")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: ${ENV_VAR} or all cores)")
    p.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("phantom", help="write a phantom image")
    s.add_argument("--kind", required=True, choices=sorted(PHANTOMS))
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--center", type=_pair, default=None, help="X,Y world position of the grid center")
    s.add_argument("--R", type=float, default=None, help="detector radius, used for the default center")
    s.add_argument("--pixel-size", type=float, default=1.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_phantom)

    s = sub.add_parser("project", help="forward double-arc projection")
    s.add_argument("--image", required=True)
    s.add_argument("--R", type=float, required=True)
    s.add_argument("--rho-max", type=float, required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--q", type=float)
    g.add_argument("--n-rho", type=int)
    s.add_argument("--n-phi", type=int, default=None, help="default round(2*pi*R)")
    s.add_argument("--arc-step", type=float, default=1.0)
    s.add_argument("--unsafe", action="store_true", help="skip the support check")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_project)

    s = sub.add_parser("add-noise", help="add Gaussian noise at a given SNR")
    s.add_argument("--sinogram", required=True)
    s.add_argument("--snr-db", type=float, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_add_noise)

    s = sub.add_parser("reconstruct", help="filtered backprojection")
    s.add_argument("--sinogram", required=True)
    s.add_argument("--grid-n", type=int, required=True)
    s.add_argument("--center", type=_pair, default=None, help="default: grid just outside the detector")
    s.add_argument("--pixel-size", type=float, default=1.0)
    s.add_argument("--epsilon", type=float, default=1.0)
    s.add_argument("--exterior", choices=EXTERIOR_MODES, default="quadrature")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("metrics", help="NMSE / NMAE report")
    s.add_argument("--recon", required=True)
    s.add_argument("--truth", required=True)
    s.add_argument("--sinogram", default=None, help="sinogram the recon came from, echoed in the report")
    s.add_argument("--epsilon", type=float, default=1.0, help="epsilon to echo with --sinogram")
    s.add_argument("--out", required=True, help="'.json' for JSON, anything else for key=value")
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("consistency", help="range-condition residuals of a sinogram")
    s.add_argument("--sinogram", required=True)
    s.add_argument("--n-max", type=int, required=True)
    s.add_argument("--epsilon", type=float, default=0.0)
    s.add_argument("--tail", action="store_true", help="close the integrals past rho_max")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_consistency)

    s = sub.add_parser("pipeline", help="run a JSON experiment config end to end")
    s.add_argument("--config", required=True)
    s.add_argument("--output-dir", default=None, help="override the config's output_dir")
    s.set_defaults(func=cmd_pipeline)
    return p


def _error_line(code: str, exc: BaseException, key: str | None = None) -> str:
    msg = " ".join(str(exc).split())
    extra = f" key={key}" if key else ""
    return f"error code={code} type={type(exc).__name__}{extra} message={json.dumps(msg)}\n"


def _setup_logging(level: str) -> None:
    for h in list(log.handlers):
        if getattr(h, "_dcart_cli", False):
            log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    handler._dcart_cli = True
    log.addHandler(handler)
    log.setLevel(level)
    log.propagate = False


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.log_level)
    try:
        threads = set_threads(args.threads)
        log.info("threads=%d", threads)
        args.func(args)
    except ConfigError as exc:
        sys.stderr.write(_error_line(exc.code, exc, exc.key))
        return 2
    except DcartError as exc:
        sys.stderr.write(_error_line(exc.code, exc))
        return 2
    except (OSError, ValueError) as exc:
        sys.stderr.write(_error_line("io" if isinstance(exc, OSError) else "value", exc))
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
