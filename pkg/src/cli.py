import argparse
import dataclasses
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.algorithms.bounds import AVALIADORES, Dominio, ExpBound, compute_bound
from src.algorithms.stability import (
    generate_stable_detrep,
    generate_stable_product,
    generate_vanishing_product,
)
from src.core.detrep import (
    BidiskRep,
    bidisk_to_halfplane,
    bidisk_to_halfplane_eval,
    check_detrep,
    eval_detrep,
    random_contraction,
)
from src.core.poly_core import MultiPoly
from src.utils.utils import DimensionError, HypothesisError, NumericalError, format_float
from src.verify import (
    TipoLema,
    compare_bounds,
    lemma_trials,
    validity_sweep,
    verify_bound,
    write_csv,
    write_json,
)

logger = logging.getLogger(__name__)

SAIDA_OK = 0
SAIDA_VIOLACOES = 1
SAIDA_USO = 2
SAIDA_HIPOTESE = 3

TEOREMAS = list(AVALIADORES)
TIPOS_CORPUS = ['product', 'detrep', 'vanishing']


@dataclass
class RunConfig:
    """Configuração de uma execução; ecoada em todos os relatórios"""
    subcommand: str = ''
    input: Optional[str] = None
    output: Optional[str] = None
    bound_file: Optional[str] = None
    theorem: Optional[str] = None
    theorems: List[str] = field(default_factory=list)
    radius: float = 2.0
    real_only: bool = False
    full_plane: bool = False
    samples: int = 1000
    seed: int = 0
    tol: float = 1e-9
    matrix_tol: float = 1e-8
    order: Optional[int] = None
    detrep: bool = False
    sweep: bool = False
    polys: int = 10
    suite: str = 'all'
    trials: int = 1000
    dim_max: int = 8
    inject_positive_imag: bool = False
    kind: str = 'product'
    count: int = 10
    nvars: int = 2
    factors: int = 3
    size: int = 3
    kernel_dim: int = 0
    random_size: Optional[List[int]] = None
    norm: float = 0.9

    def para_dict(self) -> Dict:
        return dataclasses.asdict(self)


def _adicionar_comuns(p: argparse.ArgumentParser):
    p.add_argument("--config", dest="config_file", help="Ficheiro JSON de configuração (as opções sobrepõem-se).")
    p.add_argument("-i", "--input", help="Ficheiro de entrada.")
    p.add_argument("-o", "--output", help="Ficheiro ou diretório de saída.")
    p.add_argument("--seed", type=int, help="Semente (default: 0).")
    p.add_argument("--samples", type=int, help="Número de amostras (default: 1000).")
    p.add_argument("--radius", type=float, help="Semi-lado da caixa de amostragem (default: 2).")
    p.add_argument("--tol", type=float, help="Tolerância de violação (default: 1e-9).")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="szasz",
        description="Limites de tipo Szász para polinómios estáveis e representações determinantais."
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("bound", help="Calcula o certificado de um teorema.")
    _adicionar_comuns(p)
    p.add_argument("--thm", dest="theorem", choices=TEOREMAS,
                   help="Teorema (obrigatório aqui ou no ficheiro de configuração).")
    p.add_argument("--order", type=int, help="Ordem de anulamento (vanishing1d).")
    p.add_argument("--detrep", action="store_true", default=None,
                   help="p tem representação determinantal (det/bisz2 em n variáveis).")

    p = sub.add_parser("verify", help="Verifica um certificado por amostragem.")
    _adicionar_comuns(p)
    p.add_argument("--thm", dest="theorem", choices=TEOREMAS)
    p.add_argument("-b", "--bound", dest="bound_file", help="Certificado já calculado.")
    p.add_argument("--real-only", action="store_true", default=None)
    p.add_argument("--full-plane", action="store_true", default=None,
                   help="Amostra partes imaginárias em [-R, R] em vez de [0, R].")
    p.add_argument("--detrep", action="store_true", default=None)
    p.add_argument("--order", type=int)
    p.add_argument("--sweep", action="store_true", default=None, help="Varrimento sobre o corpus gerado.")
    p.add_argument("--polys", type=int, help="Polinómios por gerador no varrimento.")

    p = sub.add_parser("convert", help="Converte uma representação no bidisco para o semiplano.")
    _adicionar_comuns(p)
    p.add_argument("--random", dest="random_size", type=int, nargs=2, metavar=("N", "M"),
                   help="Gera uma contração aleatória de bigrau (N, M).")
    p.add_argument("--norm", type=float, help="Norma da contração aleatória (default: 0.9).")
    p.add_argument("--matrix-tol", dest="matrix_tol", type=float)

    p = sub.add_parser("generate", help="Gera um corpus de polinómios estáveis.")
    _adicionar_comuns(p)
    p.add_argument("--kind", choices=TIPOS_CORPUS)
    p.add_argument("--count", type=int)
    p.add_argument("--nvars", type=int)
    p.add_argument("--factors", type=int)
    p.add_argument("--size", type=int)
    p.add_argument("--kernel-dim", dest="kernel_dim", type=int)
    p.add_argument("--order", type=int)

    p = sub.add_parser("lemmas", help="Ensaios aleatórios dos lemas.")
    _adicionar_comuns(p)
    p.add_argument("--suite", choices=['all'] + [t.value for t in TipoLema])
    p.add_argument("--trials", type=int)
    p.add_argument("--dim-max", dest="dim_max", type=int)
    p.add_argument("--inject-positive-imag", dest="inject_positive_imag", action="store_true",
                   default=None, help=argparse.SUPPRESS)

    p = sub.add_parser("compare", help="Compara certificados no mesmo polinómio.")
    _adicionar_comuns(p)
    p.add_argument("--thm", dest="theorems", choices=TEOREMAS, nargs="+", required=True)
    p.add_argument("--real-only", action="store_true", default=None)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """Valores por omissão <- ficheiro de configuração <- opções explícitas"""
    valores = {}
    ficheiro = getattr(args, "config_file", None)
    if ficheiro:
        with open(ficheiro, 'r', encoding='utf-8') as f:
            valores.update(json.load(f))
    campos = {f.name for f in dataclasses.fields(RunConfig)}
    for nome, valor in vars(args).items():
        if nome in campos and valor is not None:
            valores[nome] = valor
    desconhecidos = set(valores) - campos
    if desconhecidos:
        raise ValueError(f"Campos de configuração desconhecidos: {sorted(desconhecidos)}")
    return RunConfig(**valores)


def _carregar_polinomio(config: RunConfig) -> MultiPoly:
    if not config.input:
        raise ValueError("É necessário um polinómio de entrada (-i)")
    return MultiPoly.carregar_json(config.input)


def _opcoes_teorema(config: RunConfig, teorema: str) -> Dict:
    if teorema == 'vanishing1d':
        return {'k': config.order}
    if teorema in ('det', 'bisz2') and config.detrep:
        return {'certificado_detrep': True}
    return {}


def _imprimir_certificado(b: ExpBound):
    print(f"[SISTEMA] {b.theorem}: r={b.lead_degree} c0={format_float(b.log_prefactor)} "
          f"kappa={format_float(b.linear_abs)} lambda={format_float(b.quad)} "
          f"N={b.norm_kind.value} dominio={b.domain.value}")
    for j, c in enumerate(b.linear_complex):
        print(f"    c[{j}] = {format_float(c.real)} + {format_float(c.imag)}i")


def _escrever_relatorios(relatorios, config: RunConfig):
    if not config.output:
        return
    if config.output.endswith('.json'):
        write_json(relatorios, config.output, config.para_dict())
    else:
        write_csv(relatorios, config.output, config.para_dict())
    print(f"✅ Relatório escrito em {config.output}")


# ----------------------------------------------------------------------
# Subcomandos
# ----------------------------------------------------------------------

def _teorema(config: RunConfig) -> str:
    """Teorema já resolvido entre opções e ficheiro de configuração"""
    if not config.theorem:
        raise ValueError("Indique o teorema com --thm ou no ficheiro de configuração")
    if config.theorem not in AVALIADORES:
        raise ValueError(f"Teorema desconhecido: {config.theorem}")
    return config.theorem


def cmd_bound(config: RunConfig) -> int:
    teorema = _teorema(config)
    p = _carregar_polinomio(config)
    b = compute_bound(teorema, p, **_opcoes_teorema(config, teorema))
    _imprimir_certificado(b)
    if config.output:
        b.salvar_json(config.output)
        print(f"✅ Certificado escrito em {config.output}")
    return SAIDA_OK


def cmd_verify(config: RunConfig) -> int:
    if config.sweep:
        relatorios = validity_sweep(
            polys=config.polys, samples=config.samples, seed=config.seed,
            radius=config.radius, tol=config.tol
        )
    else:
        p = _carregar_polinomio(config)
        if config.bound_file:
            b = ExpBound.carregar_json(config.bound_file)
        elif config.theorem:
            teorema = _teorema(config)
            b = compute_bound(teorema, p, **_opcoes_teorema(config, teorema))
        else:
            raise ValueError("Indique --thm ou um certificado com -b")
        real = config.real_only or b.domain == Dominio.REAIS
        relatorios = [verify_bound(
            p, b, radius=config.radius, upper_half=not config.full_plane, real_only=real,
            samples=config.samples, seed=config.seed, tol=config.tol,
            case_id=os.path.basename(config.input)
        )]

    for r in relatorios:
        print(r)
    _escrever_relatorios(relatorios, config)
    return SAIDA_OK if all(r.accepted for r in relatorios) else SAIDA_VIOLACOES


def cmd_convert(config: RunConfig) -> int:
    if config.random_size:
        n, m = config.random_size
        D = random_contraction(n + m, config.norm, config.seed)
        brep = BidiskRep(1.0, D, n, m)
    elif config.input:
        brep = BidiskRep.carregar_json(config.input)
    else:
        raise ValueError("Indique uma representação no bidisco (-i) ou --random N M")

    rep = bidisk_to_halfplane(brep, config.matrix_tol)
    relatorio = check_detrep(rep, config.matrix_tol)
    print(f"[SISTEMA] {relatorio}")

    rng = np.random.default_rng(config.seed)
    pontos = rng.uniform(-config.radius, config.radius, (config.samples, 2)) \
        + 1j * rng.uniform(0, config.radius, (config.samples, 2))
    erro = 0.0
    for z in pontos:
        esperado = bidisk_to_halfplane_eval(brep, z)
        obtido = eval_detrep(rep, z)
        erro = max(erro, abs(obtido - esperado) / max(1.0, abs(esperado)))
    print(f"[SISTEMA] Resíduo relativo de ida e volta: {format_float(erro)}")

    if config.output:
        rep.salvar_json(config.output)
        print(f"✅ Representação escrita em {config.output}")
    return SAIDA_OK if relatorio.passed else SAIDA_VIOLACOES


def cmd_generate(config: RunConfig) -> int:
    if not config.output:
        raise ValueError("Indique o diretório de saída (-o)")
    if config.count < 0:
        raise DimensionError(f"count não pode ser negativo, recebido {config.count}")
    os.makedirs(config.output, exist_ok=True)

    entradas = []
    for k in range(config.count):
        semente = config.seed + k
        if config.kind == 'product':
            p = generate_stable_product(config.nvars, config.factors, semente)
        elif config.kind == 'detrep':
            rep, p = generate_stable_detrep(config.nvars, config.size, semente, config.kernel_dim)
            rep.salvar_json(os.path.join(config.output, f"detrep_{k:03d}.json"))
        else:
            p = generate_vanishing_product(config.nvars, config.factors, config.order or 1, semente)
        nome = f"poly_{k:03d}.json"
        p.salvar_json(os.path.join(config.output, nome))
        entradas.append({'ficheiro': nome, 'seed': semente})

    with open(os.path.join(config.output, "manifest.json"), 'w', encoding='utf-8') as f:
        json.dump({'config': config.para_dict(), 'polinomios': entradas}, f, indent=2, sort_keys=True)
    print(f"✅ {len(entradas)} polinómios escritos em {config.output}")
    return SAIDA_OK


def cmd_lemmas(config: RunConfig) -> int:
    suites = list(TipoLema) if config.suite == 'all' else [TipoLema(config.suite)]
    relatorios = [
        lemma_trials(s, config.trials, config.seed, config.dim_max,
                     positive_imag=config.inject_positive_imag, tol=config.tol)
        for s in suites
    ]
    for r in relatorios:
        print(r)
    _escrever_relatorios(relatorios, config)
    return SAIDA_OK if all(r.passed for r in relatorios) else SAIDA_VIOLACOES


def cmd_compare(config: RunConfig) -> int:
    p = _carregar_polinomio(config)
    bounds = [compute_bound(t, p, **_opcoes_teorema(config, t)) for t in config.theorems]
    real = config.real_only or any(b.domain == Dominio.REAIS for b in bounds)
    rng = np.random.default_rng(config.seed)
    Z = rng.uniform(-config.radius, config.radius, (config.samples, p.nvars)).astype(complex)
    if not real:
        Z = Z + 1j * rng.uniform(0, config.radius, (config.samples, p.nvars))
    tabela = compare_bounds(p, bounds, Z)
    print(f"[SISTEMA] {tabela}")
    if config.output:
        with open(config.output, 'w', encoding='utf-8') as f:
            json.dump({'config': config.para_dict(), 'resumo': tabela.obter_resumo()}, f, indent=2, sort_keys=True)
        print(f"✅ Comparação escrita em {config.output}")
    return SAIDA_OK


COMANDOS = {
    'bound': cmd_bound,
    'verify': cmd_verify,
    'convert': cmd_convert,
    'generate': cmd_generate,
    'lemmas': cmd_lemmas,
    'compare': cmd_compare,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Ponto de entrada da linha de comandos.

    Returns:
        int: 0 sem violações, 1 com violações, 2 erro de uso ou leitura,
        3 hipótese falhada (HypothesisError, DimensionError, NumericalError)
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return SAIDA_USO if e.code else SAIDA_OK

    try:
        config = load_config(args)
        return COMANDOS[config.subcommand](config)
    except (HypothesisError, DimensionError, NumericalError) as e:
        logger.error(f"Hipótese não verificada: {e}")
        return SAIDA_HIPOTESE
    except (ValueError, KeyError, OSError) as e:
        logger.error(f"Erro de leitura ou de uso: {e}")
        return SAIDA_USO
