#!/usr/bin/env python3
"""
CLI de kirchhoff-lab
Un subcomando por construcción reproducible: configuración JSON de entrada,
tablas CSV/JSON, gráficos SVG y manifiesto de salida
"""

from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

import click
import numpy as np
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskID, TaskProgressColumn, TextColumn
from rich.table import Table

from .config import ExperimentConfig, load_config
from .counterexample import (
    default_ladder,
    exponent_budget,
    probe_family,
    probe_local_minimum,
    t_segment,
    trace_counterexample,
)
from .errors import ConfigError, NumericalError
from .estimates import (
    growth_bounds_check,
    interpolation_check,
    linfty_decay_check,
    moser_bound_check,
    nonexistence_threshold,
    power_solution_family,
    ray_certificate,
)
from .functionals import MinPower, Nonlinearity, PurePower
from .hopf_family import (
    UNIT_BALL,
    default_family_ladder,
    family_parameters,
    shoot_compact_support,
    sine_example,
    verify_family,
)
from .hypotheses import SampleBox, c1_condition_exponents, check_hypotheses, general_existence_check
from .instanton import (
    DEFAULT_BETA,
    psi_profile,
    sobolev_level,
    truncated_profile,
    verify_asymptotics,
    verify_sobolev_level,
    verify_truncation_rates,
)
from .radial_core import (
    RadialProfile,
    build_grid,
    c1_norm,
    critical_exponent,
    geometric_ladder,
    gradient_sup_norm,
    lebesgue_norm,
    sobolev_norm,
    sobolev_norm_p,
    sup_norm,
)
from .reporting import RunWriter
from .shooting import NonlocalSearch, solve_nonlocal
from .solver import (
    ScenarioConfig,
    ScenarioReport,
    coercive_scenario,
    multiplicity_scenario,
    noncoercive_scenario,
    not_pure_power_scenario,
    scenario_rows,
)

console = Console()
logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
LOG_FILE = "kirchhoff_lab.log"

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2


# Contexto de corrida
@dataclass
class RunContext:
    command: str
    config: ExperimentConfig
    writer: RunWriter
    threads: int
    progress: Progress
    task: TaskID

    def step(self, description: str, total: Optional[int] = None) -> None:
        if total is not None:
            self.progress.update(self.task, total=total, completed=0)
        self.progress.update(self.task, description=f"[cyan]{description}")

    def advance(self) -> None:
        self.progress.advance(self.task)


def setup_logging(out_dir: Path, verbose: bool) -> logging.Handler:
    """Archivo de log en el directorio de salida más salida por consola"""
    file_handler = logging.FileHandler(out_dir / LOG_FILE, mode="w", encoding="utf-8")
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=[file_handler, RichHandler(console=console, show_path=False)],
        force=True,
    )
    return file_handler


def _teardown_logging(file_handler: logging.Handler) -> None:
    logging.getLogger().removeHandler(file_handler)
    file_handler.close()


def _flatten(data: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            out.update(_flatten(value, f"{name}."))
        else:
            out[name] = value
    return out


def _format(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def show_summary(command: str, summary: Mapping[str, Any], writer: RunWriter) -> None:
    table = Table(title=f"📊 {command}")
    table.add_column("Magnitud", style="cyan")
    table.add_column("Valor", style="green")
    for key, value in _flatten(summary).items():
        table.add_row(escape(key), escape(_format(value)))
    console.print(table)
    files = "\n".join(f"📄 {name}" for name in sorted(writer.artifacts))
    console.print(
        Panel(
            f"✅ [bold green]CORRIDA COMPLETADA[/bold green]\n\n"
            f"📁 [bold]Salida:[/bold] {writer.out_dir}\n{files}",
            title="🎉 Resultados",
            border_style="green",
        )
    )


def show_error(title: str, error: Exception) -> None:
    context = getattr(error, "context", None)
    message = error.args[0] if context and error.args else str(error)
    body = f"❌ [red]{escape(str(message))}[/red]"
    if context:
        body += "\n\n" + "\n".join(f"[bold]{escape(str(k))}:[/bold] {escape(_format(v))}" for k, v in sorted(context.items()))
    console.print(Panel(body, title=title, border_style="red"))


def run(
    command: str,
    handler: Callable[[RunContext], Dict[str, Any]],
    config_path: str,
    out_dir: Optional[str],
    seed: Optional[int],
    threads: int,
    fmt: str,
    plot: bool,
    verbose: bool,
) -> int:
    """Ejecuta un subcomando y devuelve el código de salida (0, 1 o 2)"""
    out = Path(out_dir) if out_dir else Path("salida") / command
    out.mkdir(parents=True, exist_ok=True)
    file_handler = setup_logging(out, verbose)
    try:
        config = load_config(config_path).with_seed(seed)
        writer = RunWriter(out, fmt, plot)
        logger.info(f"Iniciando '{command}' (semilla {config.seed}, hilos {threads})")
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
            console=console,
            transient=True,
        ) as progress:
            task = progress.add_task(f"[cyan]{command}", total=None)
            summary = handler(RunContext(command, config, writer, threads, progress, task))
        writer.manifest(command, config.to_dict(), config.seed, config.tolerances(), summary)
        show_summary(command, summary, writer)
        return EXIT_OK
    except ConfigError as e:
        logger.error(f"Error de configuración: {e}")
        show_error("Configuración inválida", e)
        return EXIT_CONFIG
    except KeyError as e:
        error = ConfigError(f"params: campo obligatorio ausente {e.args[0]!r}")
        logger.error(f"Error de configuración: {error}")
        show_error("Configuración inválida", error)
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error(f"Error durante el cálculo: {e}")
        show_error("Fallo numérico", e)
        return EXIT_NUMERICAL
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
        # ConfigError ya se capturó arriba; aquí llegan fallos de numpy/scipy
        logger.error(f"Error durante el cálculo: {type(e).__name__}: {e}")
        logger.debug("Traza del fallo", exc_info=True)
        show_error("Fallo numérico", e)
        return EXIT_NUMERICAL
    finally:
        _teardown_logging(file_handler)


# Grupo y opciones comunes
@click.group()
@click.version_option(package_name="kirchhoff-lab")
def cli() -> None:
    """🧮 kirchhoff-lab: experimentos con problemas de Kirchhoff degenerados"""


def common_options(func: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option(
            "--config", "config_path", required=True, type=click.Path(dir_okay=False),
            help="Archivo JSON del experimento",
        ),
        click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Directorio de salida"),
        click.option("--seed", type=click.IntRange(min=0), help="Semilla (sustituye la del archivo)"),
        click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True, help="Hilos de trabajo"),
        click.option(
            "--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True,
            help="Formato de las tablas",
        ),
        click.option("--plot", is_flag=True, help="Generar gráficos SVG"),
        click.option("--verbose", is_flag=True, help="Log en nivel DEBUG"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def subcommand(name: str) -> Callable[[Callable[[RunContext], Dict[str, Any]]], Callable[[RunContext], Dict[str, Any]]]:
    """Registra un manejador como subcomando con las opciones comunes"""

    def decorate(handler: Callable[[RunContext], Dict[str, Any]]) -> Callable[[RunContext], Dict[str, Any]]:
        @cli.command(name=name, help=handler.__doc__)
        @common_options
        def command(**options: Any) -> None:
            sys.exit(run(name, handler, **options))

        return handler

    return decorate


# Lectura de parámetros
def _ladder(spec: Any, default: Sequence[float]) -> List[float]:
    """Lista explícita o {"start", "ratio", "count"}"""
    if spec is None:
        return [float(v) for v in default]
    if isinstance(spec, Mapping):
        try:
            return geometric_ladder(float(spec["start"]), float(spec["ratio"]), int(spec["count"]))
        except KeyError as e:
            raise ConfigError(f"params.ladder.{e.args[0]}: campo obligatorio ausente") from e
    if isinstance(spec, (list, tuple)) and spec:
        return [float(v) for v in spec]
    raise ConfigError("params.ladder: se esperaba una lista o {start, ratio, count}")


def _model(nonlin: Nonlinearity) -> Nonlinearity:
    if nonlin.q is None or nonlin.varpi is None or nonlin.lam is None:
        raise ConfigError("nonlinearity.model: este subcomando requiere la no linealidad modelo")
    return nonlin


def _pure_power(config: ExperimentConfig, command: str) -> PurePower:
    term = config.require_term(command)
    if not isinstance(term, PurePower):
        raise ConfigError(f"term.variant: '{command}' requiere pure_power")
    return term


def _sample_box(config: ExperimentConfig) -> Optional[SampleBox]:
    spec = config.param("sample_box")
    if spec is None:
        return None
    try:
        return SampleBox(**spec)
    except TypeError as e:
        raise ConfigError(f"params.sample_box: {e}") from e


def _scenario_config(config: ExperimentConfig) -> ScenarioConfig:
    return ScenarioConfig.from_dict(dict(config.param("scenario", {})))


# Subcomandos
def _norms_profile(spec: Mapping[str, Any], config: ExperimentConfig) -> tuple:
    domain = config.domain
    kind = spec.get("kind", "sine")
    if kind == "sine":
        if domain.kind != "interval":
            raise ConfigError("params.profile: el perfil sine requiere un intervalo")
        i = int(spec.get("i", 1))
        if i < 1:
            raise ConfigError("params.profile.i: se requiere i >= 1")
        R = domain.R
        c = math.sqrt(2.0 / R)
        k = i * math.pi / R
        grid = build_grid(domain, config.grid.cells, config.grid.grading)
        u = RadialProfile.from_function(
            grid, lambda r: c * np.sin(k * r), lambda r: c * k * np.cos(k * r),
            dirichlet=True,
        )
        return u, {"W_norm": k, "L2_norm": 1.0, "sup": c}
    if kind == "instanton":
        return psi_profile(float(spec["eps"]), float(spec.get("beta", DEFAULT_BETA)), domain), {}
    if kind == "truncated":
        return truncated_profile(float(spec["eps"]), float(spec["m"]), domain), {}
    raise ConfigError(f"params.profile.kind: perfil desconocido '{kind}'")


@subcommand("norms")
def cmd_norms(ctx: RunContext) -> Dict[str, Any]:
    """Normas W, L^s, sup y C¹ de un perfil radial"""
    config, domain = ctx.config, ctx.config.domain
    ctx.step("Evaluando normas")
    try:
        u, expected = _norms_profile(dict(config.param("profile", {"kind": "sine", "i": 1})), config)
    except KeyError as e:
        raise ConfigError(f"params.profile.{e.args[0]}: campo obligatorio ausente") from e
    values: Dict[str, float] = {
        "W_norm": sobolev_norm(u, domain),
        "W_norm_p": sobolev_norm_p(u, domain),
        "sup": sup_norm(u),
        "gradient_sup": gradient_sup_norm(u),
        "C1": c1_norm(u),
    }
    for s in config.param("s_values", [2.0]):
        values[f"L{float(s):g}_norm"] = lebesgue_norm(u, float(s), domain)
    rows = [{"quantity": k, "value": v, "provenance": "computed"} for k, v in values.items()]
    rows += [{"quantity": k, "value": v, "provenance": "closed-form"} for k, v in expected.items()]
    ctx.writer.table("norms", rows)
    ctx.writer.profile("norms", u)
    summary: Dict[str, Any] = dict(values)
    for key, value in expected.items():
        if key in values:
            summary[f"{key}_defect"] = abs(values[key] - value)
    return summary


@subcommand("instanton-asymptotics")
def cmd_instanton_asymptotics(ctx: RunContext) -> Dict[str, Any]:
    """Asintótica de ‖ψ_ε‖_s^s y aproximación del nivel de Sobolev"""
    config, domain, writer = ctx.config, ctx.config.domain, ctx.writer
    beta = float(config.param("beta", DEFAULT_BETA))
    ladder = _ladder(config.param("eps_ladder"), geometric_ladder(10**-0.5, 10**-0.25, 9))
    s_values = [float(s) for s in config.param("s_values", [4.0, critical_exponent(domain)])]

    C, level, S = sobolev_level(domain)
    writer.table(
        "sobolev_constants",
        [{"C_norm": C, "level": level, "S": S, "provenance": "closed-form"}],
    )
    summary: Dict[str, Any] = {"C_norm": C, "sobolev_level": level, "S": S}

    ctx.step("Escalera de epsilon", total=len(s_values) + 1)
    for s in s_values:
        report = verify_asymptotics(s, ladder, beta, domain, ctx.threads)
        name = f"asymptotics_s{s:g}"
        writer.table(name, report.rows())
        writer.plot(name, "eps", ["norm_s_s", "gap"], title=f"‖ψ_ε‖_s^s, s = {s:g}")
        writer.record(**{f"slope_s{s:g}": report.fitted_slope, f"lower_constant_s{s:g}": report.lower_constant})
        summary[f"s{s:g}"] = report.summary()
        ctx.advance()

    level_report = verify_sobolev_level(ladder, beta, domain, ctx.threads)
    writer.table("sobolev_level", level_report.rows())
    writer.plot("sobolev_level", "eps", ["relative_gap"], title="Brecha relativa a S^{N/p}")
    writer.record(final_gap=level_report.final_gap, eps0=level_report.eps0)
    summary["final_gap"] = level_report.final_gap
    summary["eps0"] = level_report.eps0
    ctx.advance()

    trunc = config.param("truncation")
    if trunc is not None:
        rates = verify_truncation_rates(
            float(trunc.get("eps", 1e-3)),
            _ladder(trunc.get("m_ladder"), geometric_ladder(1.0, 2.0, 8)),
            domain,
            None if trunc.get("s") is None else float(trunc["s"]),
            ctx.threads,
        )
        writer.table("truncation", rates.rows())
        writer.record(gradient_slope=rates.gradient_slope, critical_slope=rates.critical_slope)
        summary["truncation"] = {
            "gradient_slope": rates.gradient_slope,
            "predicted_gradient_slope": rates.predicted_gradient_slope,
            "critical_slope": rates.critical_slope,
            "predicted_critical_slope": rates.predicted_critical_slope,
            "sandwich_holds": rates.sandwich_holds,
        }
    return summary


@subcommand("counterexample")
def cmd_counterexample(ctx: RunContext) -> Dict[str, Any]:
    """
    Traza de ε^σψ_ε: J negativo con norma W arbitrariamente pequeña

    Escalera por defecto: razón 1e-1, 30 peldaños (1e-1 ... 1e-30). La
    escalera fina de razón 10^{-1/4} con 16 peldaños se configura con
    params.eps_ladder = {"start": 0.5623, "ratio": 0.5623, "count": 16}.
    La malla mínima es de 4 celdas.
    """
    config, domain, writer = ctx.config, ctx.config.domain, ctx.writer
    term = _pure_power(config, ctx.command)
    nonlin = _model(config.require_nonlinearity(ctx.command))
    budget = exponent_budget(
        domain.N,
        domain.p,
        nonlin.q,
        nonlin.varpi,
        term.r,
        config.param("sigma"),
        config.param("alpha"),
        config.param("beta"),
    )
    writer.table("budget", [budget.to_dict()], provenance="closed-form")
    ladder = _ladder(config.param("eps_ladder"), default_ladder())
    ctx.step("Trazando la sucesión")
    trace = trace_counterexample(budget, ladder, term, nonlin, domain, ctx.threads)
    writer.table("trace", trace.rows())
    writer.plot("trace", "eps", ["w_norm", "sup_norm", "J"], title="ε^σψ_ε")
    writer.record(eps_star=trace.eps_star, C_fit=trace.C_fit, c_fit=trace.c_fit)

    summary = {k: v for k, v in trace.summary().items() if k != "budget"}
    if trace.eps_star is not None:
        ctx.step("Segmento t·ψ_ε")
        seg = t_segment(budget, trace.eps_star, term, nonlin, domain)
        writer.table("t_segment", seg.rows())
        summary["initially_positive"] = seg.initially_positive
        summary["first_sign_change"] = seg.first_sign_change
    return summary


@subcommand("minimality-probe")
def cmd_minimality_probe(ctx: RunContext) -> Dict[str, Any]:
    """Sonda de minimalidad local del origen en bolas W, L^∞ o C¹"""
    config, domain = ctx.config, ctx.config.domain
    nonlin = config.require_nonlinearity(ctx.command)
    base = config.require_term(ctx.command)
    r_values = config.param("r_values")
    terms = [PurePower(float(r), domain.p) for r in r_values] if r_values else [base]
    topologies = list(config.param("topologies", ["W", "Linf"]))
    radius = float(config.param("radius", 0.5))
    tol = float(config.param("tol", 1e-10))
    family = probe_family(
        domain,
        config.seed,
        config.param("eps_values"),
        float(config.param("beta", DEFAULT_BETA)),
        int(config.param("eigen_count", 4)),
        int(config.param("bump_count", 8)),
    )
    ctx.step("Sondeando", total=len(terms) * len(topologies))
    rows = []
    summary: Dict[str, Any] = {"family_size": len(family)}
    for term in terms:
        for topology in topologies:
            verdict = probe_local_minimum(
                term, nonlin, domain, topology, radius, family,
                config.param("thetas"), tol, ctx.threads,
            )
            r = getattr(term, "r", None)
            rows.append(dict(verdict.summary(), r=r, provenance="computed"))
            summary[f"r={r}:{topology}"] = verdict.verdict
            ctx.advance()
    ctx.writer.table("probe", rows)
    return summary


def _scenario_outputs(ctx: RunContext, scenario: ScenarioReport) -> Dict[str, Any]:
    writer = ctx.writer
    writer.table("solutions", scenario_rows([scenario]))
    for label, report in scenario.solutions.items():
        writer.profile(label.replace(" ", "_"), report.profile)
    if scenario.certificate is not None:
        cert = scenario.certificate
        writer.table(
            "certificate",
            [{"item": name, "holds": ok, "margin": margin} for name, (ok, margin) in cert.items.items()],
        )
        writer.record(mu=cert.mu, lam=cert.lam, S=cert.S, R=cert.R, T=cert.T, Lambda_mu=cert.Lambda_mu)
    for label, xval in scenario.cross_validation.items():
        writer.record(**{f"xval_{label}": xval})
    summary = scenario.summary()
    summary["solutions"] = {label: r.J_plus for label, r in scenario.solutions.items()}
    return summary


@subcommand("solve")
def cmd_solve(ctx: RunContext) -> Dict[str, Any]:
    """Soluciones del problema no local: disparo con consistencia o escenarios variacionales"""
    config, domain, writer = ctx.config, ctx.config.domain, ctx.writer
    term = config.require_term(ctx.command)
    nonlin = config.require_nonlinearity(ctx.command)
    route = config.param("route", "shooting")
    if route == "shooting":
        search = NonlocalSearch.from_dict(dict(config.param("search", {})))
        ctx.step("Barrido de consistencia")
        result = solve_nonlocal(term, nonlin, domain, search, ctx.threads)
        rows = []
        for k, report in enumerate(result):
            rows.append(dict(report.summary(), label=f"root_{k}", provenance="computed"))
            writer.profile(f"root_{k}", report.profile)
        writer.table("solutions", rows)
        if result.rejected:
            writer.table("rejected_roots", [r.summary() for r in result.rejected])
        if result.scan is not None:
            writer.table("consistency_scan", result.scan.rows())
            writer.plot("consistency_scan", "gamma", ["product"], title="γ·M(‖u_γ‖^p)")
        writer.record(roots=[{"gamma": r.gamma, "d": r.d} for r in result])
        return {
            "route": route,
            "method": result.method,
            "solutions": len(result),
            "rejected": len(result.rejected),
        }
    scenario_config = _scenario_config(config)
    ctx.step(f"Escenario {route}")
    if route == "coercive":
        scenario = coercive_scenario(_pure_power(config, ctx.command), nonlin, domain, scenario_config)
    elif route == "noncoercive":
        scenario = noncoercive_scenario(_pure_power(config, ctx.command), nonlin, domain, scenario_config)
    else:
        raise ConfigError(f"params.route: ruta desconocida '{route}'")
    return dict(_scenario_outputs(ctx, scenario), route=route)


@subcommand("multiplicity")
def cmd_multiplicity(ctx: RunContext) -> Dict[str, Any]:
    """Tres soluciones con niveles ordenados bajo el certificado geométrico"""
    config = ctx.config
    term = _pure_power(config, ctx.command)
    nonlin = _model(config.require_nonlinearity(ctx.command))
    ctx.step("Certificado y tres soluciones")
    scenario = multiplicity_scenario(
        term, nonlin, config.domain, config.param("mu"), config.param("lam"), _scenario_config(config)
    )
    return _scenario_outputs(ctx, scenario)


@subcommand("not-pure-power")
def cmd_not_pure_power(ctx: RunContext) -> Dict[str, Any]:
    """Escenario con M(s^p) = min{s^{r1-p}, s^{r2-p}}"""
    config = ctx.config
    term = config.require_term(ctx.command)
    if not isinstance(term, MinPower):
        raise ConfigError("term.variant: 'not-pure-power' requiere min_power")
    nonlin = _model(config.require_nonlinearity(ctx.command))
    ctx.step("Escenario min_power")
    scenario = not_pure_power_scenario(term, nonlin, config.domain, _scenario_config(config))
    return _scenario_outputs(ctx, scenario)


@subcommand("hopf-family")
def cmd_hopf_family(ctx: RunContext) -> Dict[str, Any]:
    """Familia de soluciones de soporte compacto con sup acotado y C¹ no acotada"""
    config, domain, writer = ctx.config, ctx.config.domain, ctx.writer
    if (domain.kind, domain.N, domain.R, domain.p) != (UNIT_BALL.kind, UNIT_BALL.N, UNIT_BALL.R, UNIT_BALL.p):
        raise ConfigError("domain: 'hopf-family' trabaja en la bola unidad de R^3 con p = 2")
    q = float(config.param("q", 1.2))
    varpi = float(config.param("varpi", 1.4))
    r = float(config.param("r", 5.0))
    b0 = config.param("b0")

    ctx.step("Disparo de soporte compacto")
    phi = shoot_compact_support(q, varpi, None if b0 is None else float(b0))
    writer.table("compact_support", [phi.summary()])
    writer.table("compact_support_scan", phi.scan)
    writer.profile("phi", phi.profile)

    params = family_parameters(domain.N, r, varpi, q, phi.b0, phi.W_norm)
    writer.table("family_parameters", [params.to_dict()], provenance="closed-form")
    ladder = _ladder(config.param("lambda_ladder"), default_family_ladder())
    ctx.step("Escalera de lambda")
    report = verify_family(params, phi, ladder, ctx.threads)
    writer.table("family", report.rows())
    writer.plot("family", "lambda", ["sup", "C1", "W_norm"], title="Φ_{λ,μ(λ)}")
    writer.record(
        alpha=params.alpha,
        E=params.E,
        b0=phi.b0,
        d=phi.d,
        rho0=phi.rho0,
        sup_slope=report.sup_slope,
        c1_slope=report.c1_slope,
    )
    return dict(report.summary(), flat_residual=phi.flat_residual, d=phi.d, rho0=phi.rho0)


@subcommand("sine-example")
def cmd_sine_example(ctx: RunContext) -> Dict[str, Any]:
    """Infinitas soluciones √(2/π)sin(iρ) con M degenerado en infinito"""
    config = ctx.config
    indices = [int(i) for i in config.param("i_values", list(range(1, 9)))]
    cells = int(config.param("cells", 1680))
    ctx.step("Modos del seno", total=len(indices))
    rows = []
    for i in indices:
        rows.append(sine_example(i, cells).summary())
        ctx.advance()
    ctx.writer.table("sine", rows)
    ctx.writer.plot("sine", "i", ["W2", "C1", "sup"], title="φ_i")
    sups = [row["sup"] for row in rows]
    return {
        "modes": len(rows),
        "max_W2_defect": max(row["W2_defect"] for row in rows),
        "max_residual": max(row["residual"] for row in rows),
        "sup_spread": max(sups) - min(sups),
    }


@subcommand("nonexistence-bound")
def cmd_nonexistence_bound(ctx: RunContext) -> Dict[str, Any]:
    """Umbral Λ₁ por debajo del cual solo existe la solución trivial"""
    config, domain, writer = ctx.config, ctx.config.domain, ctx.writer
    nonlin = config.nonlinearity
    term = config.term
    q = config.param("q", nonlin.q if nonlin is not None else None)
    varpi = config.param("varpi", nonlin.varpi if nonlin is not None else None)
    r = config.param("r", getattr(term, "r", None))
    if q is None or varpi is None or r is None:
        raise ConfigError("params: se requieren q, varpi y r (o nonlinearity.model y term)")
    cert = nonexistence_threshold(
        float(q), float(varpi), float(r), domain,
        config.param("embed_estimate", "variational"), config.param("C"),
    )
    writer.table("threshold", [cert.to_dict()], provenance="closed-form")
    writer.record(Lambda1=cert.Lambda1, C=cert.C, embed_label=cert.label)

    rows = []
    lam_values = [float(v) for v in config.param("lam_values", [])]
    verify = bool(config.param("verify_scan", False))
    ctx.step("Comprobando lambdas", total=len(lam_values))
    for lam in lam_values:
        c1, c2 = cert.coefficients(lam)
        row: Dict[str, Any] = {
            "lam": lam, "coefficient_1": c1, "coefficient_2": c2, "excludes": cert.excludes(lam),
        }
        if verify and cert.excludes(lam):
            if term is None or nonlin is None:
                raise ConfigError("verify_scan: se requieren term y nonlinearity")
            search = NonlocalSearch.from_dict(dict(config.param("search", {})))
            found = solve_nonlocal(term, _model(nonlin).with_lambda(lam), domain, search, ctx.threads)
            row["solutions_found"] = len(found)
        rows.append(row)
        ctx.advance()
    writer.table("lambda_check", rows)
    summary = cert.to_dict()
    if verify:
        summary["scan_empty_below_threshold"] = all(
            row.get("solutions_found", 0) == 0 for row in rows if row["excludes"]
        )
    return summary


@subcommand("hypothesis-check")
def cmd_hypothesis_check(ctx: RunContext) -> Dict[str, Any]:
    """Estado de cada hipótesis del marco variacional"""
    config, domain, writer = ctx.config, ctx.config.domain, ctx.writer
    term = config.require_term(ctx.command)
    nonlin = config.require_nonlinearity(ctx.command)
    box = _sample_box(config)
    ctx.step("Comprobando hipótesis")
    report = check_hypotheses(term, nonlin, domain, box)
    writer.table("hypotheses", report.rows())
    summary: Dict[str, Any] = {
        "compactness": report.compactness,
        "holding": sum(res.holds for res in report.results.values()),
        "total": len(report.results),
    }
    existence_rows = []
    for regime in config.param("regimes", []):
        verdict = general_existence_check(term, nonlin, domain, regime, box)
        existence_rows.extend(verdict.rows())
        summary[f"existence_{regime}"] = verdict.verdict
    if existence_rows:
        writer.table("existence", existence_rows)
    c1 = config.param("c1_condition")
    if c1 is not None:
        exps = c1_condition_exponents(
            float(c1["r"]), domain.p, float(c1["ell"]), float(c1["ell_tilde"]), domain
        )
        writer.table("c1_condition", [exps.to_dict()], provenance="closed-form")
        summary["c1_condition"] = exps.to_dict()
    return summary


@subcommand("bounds-check")
def cmd_bounds_check(ctx: RunContext) -> Dict[str, Any]:
    """Cotas a priori: crecimiento, rayo, Moser, decaimiento L^∞ e interpolación"""
    config, domain, writer = ctx.config, ctx.config.domain, ctx.writer
    checks = list(config.param("checks", ["growth"]))
    box = _sample_box(config)
    ctx.step("Cotas", total=len(checks))
    summary: Dict[str, Any] = {}
    for check in checks:
        spec = dict(config.param(check, {}))
        if check == "growth":
            report = growth_bounds_check(
                config.require_term(ctx.command), config.require_nonlinearity(ctx.command), domain,
                spec.get("r_tilde"), box, float(spec.get("A", 1.0)),
            )
        elif check == "ray":
            report = ray_certificate(
                config.require_term(ctx.command), config.require_nonlinearity(ctx.command), domain,
                spec.get("r_tilde"), box,
            )
        elif check == "moser":
            nonlin = config.require_nonlinearity(ctx.command)
            heights = [float(d) for d in spec.get("heights", [0.5, 1.0, 2.0, 4.0])]
            members = power_solution_family(nonlin, domain, heights)
            c, e = nonlin.pieces[0]
            ell = float(spec.get("ell", e))
            L = float(spec.get("L", max(m.gamma for m in members) * c * (1.0 + 1e-9)))
            report = moser_bound_check(members, ell, L, domain, ctx.threads)
        elif check == "linfty":
            report = linfty_decay_check(
                config.require_term(ctx.command), config.require_nonlinearity(ctx.command),
                float(spec["ell"]), domain,
                _ladder(spec.get("eps_ladder"), geometric_ladder(1e-2, 0.1, 5)),
                int(spec.get("cells", config.grid.cells)),
            )
        elif check == "interpolation":
            nonlin = config.nonlinearity
            q = spec.get("q", getattr(nonlin, "q", None))
            varpi = spec.get("varpi", getattr(nonlin, "varpi", None))
            r = spec.get("r", getattr(config.term, "r", None))
            if q is None or varpi is None or r is None:
                raise ConfigError("params.interpolation: se requieren q, varpi y r")
            u = psi_profile(float(spec.get("eps", 0.1)), float(spec.get("beta", DEFAULT_BETA)), domain)
            report = interpolation_check(
                u, float(q), float(varpi), float(r), domain, spec.get("C"),
                spec.get("embed_estimate", "sobolev-holder"),
            )
        else:
            raise ConfigError(f"params.checks: comprobación desconocida '{check}'")
        writer.table(f"bounds_{check}", report.rows())
        writer.record(**{f"{check}_{k}": v for k, v in report.fitted.items()})
        summary[check] = report.summary()
        ctx.advance()
    return summary


def main() -> None:
    """Punto de entrada del script de consola"""
    cli()


if __name__ == "__main__":
    main()
