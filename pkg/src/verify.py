import csv
import json
import logging
import math
from datetime import datetime
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.algorithms.bounds import (
    Dominio,
    ExpBound,
    bbsz_quantity,
    compute_bound,
    evaluate_log_many,
)
from src.algorithms.stability import (
    generate_stable_detrep,
    generate_stable_product,
    generate_vanishing_product,
)
from src.core.detrep import im_trace_sides, sum_b_sides, trace_pm_sides
from src.core.poly_core import MultiPoly, evaluate_many
from src.utils.utils import (
    DimensionError,
    HypothesisError,
    format_float,
    normalize_to_identity,
    random_complex_matrix,
    random_psd,
)

logger = logging.getLogger(__name__)

TOL_VIOLACAO = 1e-9
TOL_IGUALDADE = 1e-9
TOL_REALIDADE = 1e-7
COLUNAS_CSV = ['case_id', 'theorem', 'n', 'trials', 'violations', 'worst_margin', 'witness_z', 'seed', 'expected']

# Estado esperado de uma linha do relatório
ESPERADO_VALIDO = 'valid'
ESPERADO_VIOLACAO = 'known-violation'


def _numero_json(x: float):
    """Valores não finitos vão para JSON como texto"""
    return x if math.isfinite(x) else format_float(x)


class VerifyReport:
    """
    Resultado de uma verificação por amostragem.

    Attributes:
        trials (int): Número de amostras ou ensaios
        violations (int): Amostras com margem < -tol
        worst_log_margin (float): Menor margem observada (escala log nos limites)
        witness (Optional[Dict]): Pior ponto, presente apenas se houver violações
        seed (int): Semente
        elapsed (float): Duração em segundos (fora dos relatórios escritos)
        case_id (str): Identificador do caso
        theorem (str): Teorema ou lema verificado
        n (int): Número de variáveis ou dimensão máxima
        expected (str): ESPERADO_VALIDO, ou ESPERADO_VIOLACAO para um caso com
            contra-exemplos conhecidos
    """

    def __init__(
        self,
        trials: int = 0,
        violations: int = 0,
        worst_log_margin: float = math.inf,
        witness: Optional[Dict] = None,
        seed: int = 0,
        elapsed: float = 0.0,
        case_id: str = '',
        theorem: str = '',
        n: int = 0,
        expected: str = ESPERADO_VALIDO
    ):
        self.trials = trials
        self.violations = violations
        self.worst_log_margin = worst_log_margin
        self.witness = witness
        self.seed = seed
        self.elapsed = elapsed
        self.case_id = case_id
        self.theorem = theorem
        self.n = n
        self.expected = expected

    @property
    def passed(self) -> bool:
        return self.violations == 0

    @property
    def accepted(self) -> bool:
        """Sem violações, ou com violações num caso de violação conhecida"""
        return self.passed or self.expected == ESPERADO_VIOLACAO

    def witness_z(self) -> str:
        if not self.witness:
            return ''
        return ';'.join(
            f"{format_float(z.real)}{'+' if z.imag >= 0 else '-'}{format_float(abs(z.imag))}j"
            for z in self.witness['z']
        )

    def para_linha(self) -> Dict:
        """Linha do relatório CSV/JSON (sem a duração, para ser determinística)"""
        return {
            'case_id': self.case_id,
            'theorem': self.theorem,
            'n': self.n,
            'trials': self.trials,
            'violations': self.violations,
            'worst_margin': format_float(self.worst_log_margin),
            'witness_z': self.witness_z(),
            'seed': self.seed,
            'expected': self.expected
        }

    def obter_resumo(self) -> Dict:
        """Retorna um resumo dos resultados"""
        resumo = self.para_linha()
        resumo['worst_margin'] = self.worst_log_margin
        resumo['passou'] = self.passed
        resumo['aceite'] = self.accepted
        resumo['tempo_execucao_s'] = round(self.elapsed, 4)
        return resumo

    def __str__(self) -> str:
        if self.passed:
            estado = "✅"
        else:
            estado = "⚠️" if self.accepted else "❌"
        return (
            f"{estado} {self.case_id or self.theorem}: {self.violations}/{self.trials} violações, "
            f"pior margem={format_float(self.worst_log_margin)}"
        )


def _agregar(relatorios: Sequence[VerifyReport], **campos) -> VerifyReport:
    """Combina relatórios por contagem e mínimo; a testemunha é a da pior margem"""
    agregado = VerifyReport(**campos)
    for r in relatorios:
        agregado.trials += r.trials
        agregado.violations += r.violations
        agregado.elapsed += r.elapsed
        if r.worst_log_margin < agregado.worst_log_margin:
            agregado.worst_log_margin = r.worst_log_margin
            if r.witness is not None:
                agregado.witness = r.witness
    if agregado.violations == 0:
        agregado.witness = None
    elif agregado.witness is None:
        agregado.witness = next(r.witness for r in relatorios if r.witness is not None)
    return agregado


# ----------------------------------------------------------------------
# Verificação de limites
# ----------------------------------------------------------------------

def _amostrar_regiao(
    rng: np.random.Generator,
    n: int,
    samples: int,
    radius: float,
    upper_half: bool,
    real_only: bool
) -> np.ndarray:
    X = rng.uniform(-radius, radius, (samples, n))
    if real_only:
        return X.astype(complex)
    y_min = 0.0 if upper_half else -radius
    Y = rng.uniform(y_min, radius, (samples, n))
    return X + 1j * Y


def verify_bound(
    p: MultiPoly,
    b: ExpBound,
    radius: float = 2.0,
    upper_half: bool = True,
    real_only: bool = False,
    samples: int = 1000,
    seed: int = 0,
    tol: float = TOL_VIOLACAO,
    case_id: str = ''
) -> VerifyReport:
    """
    Amostra a região uniformemente por coordenada e compara log|p(z)| com o
    expoente do certificado.

    A margem de cada amostra é evaluate_log(b, z) - log|p(z)|; |p(z)| = 0 dá
    margem +inf. O resultado depende apenas das entradas e da semente.

    Args:
        p: Polinómio
        b: Certificado
        radius: Semi-lado da caixa de amostragem por coordenada
        upper_half: Restringe as partes imaginárias a [0, radius]
        real_only: Amostra apenas pontos reais
        samples: Número de amostras
        seed: Semente
        tol: Tolerância de violação na escala log

    Raises:
        DimensionError: Aridades diferentes
        HypothesisError: Certificado só para pontos reais numa região complexa
    """
    if p.nvars != b.nvars:
        raise DimensionError(f"Polinómio com {p.nvars} variáveis e certificado com {b.nvars}")
    if b.domain == Dominio.REAIS and not real_only:
        raise HypothesisError("Certificado para pontos reais exige real_only=True")
    if samples < 1:
        raise DimensionError(f"samples tem de ser positivo, recebido {samples}")

    inicio = datetime.now()
    rng = np.random.default_rng(seed)
    Z = _amostrar_regiao(rng, p.nvars, samples, radius, upper_half, real_only)

    modulos = np.abs(evaluate_many(p, Z))
    expoentes = evaluate_log_many(b, Z)
    with np.errstate(divide='ignore', invalid='ignore'):
        margens = expoentes - np.log(modulos)
    margens = np.where(modulos == 0, np.inf, margens)

    violacoes = int(np.count_nonzero(margens < -tol))
    pior = int(np.argmin(margens))
    testemunha = None
    if violacoes:
        testemunha = {
            'z': [complex(v) for v in Z[pior]],
            'modulo_p': float(modulos[pior]),
            'limite': float(np.exp(expoentes[pior]))
        }
        logger.warning(
            f"{violacoes} violações de {b.theorem or 'certificado'}; pior margem {margens[pior]:.6g}"
        )

    return VerifyReport(
        trials=samples,
        violations=violacoes,
        worst_log_margin=float(margens[pior]),
        witness=testemunha,
        seed=seed,
        elapsed=(datetime.now() - inicio).total_seconds(),
        case_id=case_id,
        theorem=b.theorem,
        n=p.nvars
    )


# ----------------------------------------------------------------------
# Nitidez no eixo imaginário
# ----------------------------------------------------------------------

class SharpnessRow:
    """
    Linha da tabela de nitidez.

    Attributes:
        n (int): Índice da família
        y (float): Ponto iy do eixo imaginário
        modulo (float): |p_n(iy)|
        alvo (float): exp(gamma y^2)
        razao (float): |p_n(iy)| / exp(gamma y^2)
    """

    def __init__(self, n: int, y: float, modulo: float, alvo: float, razao: float):
        self.n = n
        self.y = y
        self.modulo = modulo
        self.alvo = alvo
        self.razao = razao

    def obter_resumo(self) -> Dict:
        return {'n': self.n, 'y': self.y, 'modulo': self.modulo, 'alvo': self.alvo, 'razao': self.razao}

    def __str__(self) -> str:
        return (
            f"n={self.n} y={format_float(self.y)} |p_n(iy)|={format_float(self.modulo)} "
            f"alvo={format_float(self.alvo)} razao={format_float(self.razao)}"
        )


def sharpness_run(c1: float, c2: float, n_list: Sequence[int], y_grid: Sequence[float]) -> List[SharpnessRow]:
    """
    Avalia p_n(iy) = (1 + i c1 y/n)^n (1 + d_n y^2/n)^n contra exp(gamma y^2).

    O cálculo é feito em escala log com log1p, de modo que a razão a y = 0 é
    exatamente 1.

    Raises:
        HypothesisError: gamma <= 0 ou d_n < 0 para algum n
    """
    gama = (c1 ** 2 - 2 * c2) / 2
    if gama <= 0:
        raise HypothesisError(f"gamma = {gama:.6g} tem de ser positivo")

    linhas = []
    for n in n_list:
        d_n = gama - c1 ** 2 / (2 * n)
        if d_n < 0:
            raise HypothesisError(f"d_n = {d_n:.6g} < 0 para n = {n}")
        for y in y_grid:
            log_modulo = n * (0.5 * math.log1p((c1 * y / n) ** 2) + math.log1p(d_n * y ** 2 / n))
            log_alvo = gama * y ** 2
            linhas.append(SharpnessRow(
                n, float(y), math.exp(log_modulo), math.exp(log_alvo), math.exp(log_modulo - log_alvo)
            ))
    return linhas


# ----------------------------------------------------------------------
# Lemas
# ----------------------------------------------------------------------

class TipoLema(Enum):
    """Lemas com oráculo aleatório"""
    SQUARES = "squares"
    LOG = "log"
    TRACE_PM = "tracepm"
    SUM_B = "sumb"
    IM_TRACE = "imtrace"
    BBSZ = "bbsz"


def squares_sides(alfas: Sequence[complex]) -> tuple:
    """(sum |alpha_j|^2, |sum alpha_j|^2 - 2 Re sum_{j<k} alpha_j alpha_k)"""
    a = np.asarray(alfas, dtype=complex)
    soma = a.sum()
    pares = (soma ** 2 - (a ** 2).sum()) / 2
    return float((np.abs(a) ** 2).sum()), float(abs(soma) ** 2 - 2 * pares.real)


def squares_equality_holds(alfas: Sequence[complex], tol: float = TOL_REALIDADE) -> bool:
    """Caracterização da igualdade: no máximo um alpha_j com |Im| > tol"""
    return int(np.count_nonzero(np.abs(np.asarray(alfas, dtype=complex).imag) > tol)) <= 1


def log_sides(z: complex) -> tuple:
    """(log|1 + z|, Re z + |z|^2/2)"""
    z = complex(z)
    return math.log(abs(1 + z)), z.real + abs(z) ** 2 / 2


def _alfas(rng: np.random.Generator, d: int, positive_imag: bool) -> np.ndarray:
    reais = rng.standard_normal(d)
    imaginarias = rng.standard_normal(d)
    if not positive_imag:
        imaginarias = -np.abs(imaginarias)
    return reais + 1j * imaginarias


def _ensaio_lema(which: TipoLema, rng: np.random.Generator, dim_max: int, positive_imag: bool):
    """Um ensaio: (lado esquerdo, lado direito, violação de igualdade, entradas)"""
    d = int(rng.integers(1, dim_max + 1))
    igualdade_falhada = False

    if which == TipoLema.SQUARES:
        alfas = _alfas(rng, d, positive_imag)
        esquerdo, direito = squares_sides(alfas)
        if abs(direito - esquerdo) <= TOL_IGUALDADE * max(1.0, abs(direito)):
            igualdade_falhada = not squares_equality_holds(alfas)
        return esquerdo, direito, igualdade_falhada, list(alfas)

    if which == TipoLema.LOG:
        z = complex(*rng.standard_normal(2))
        if z == -1:
            z = 0j
        esquerdo, direito = log_sides(z)
        return esquerdo, direito, False, [z]

    if which == TipoLema.TRACE_PM:
        M = random_complex_matrix(rng, d, d)
        P = random_psd(rng, d, int(rng.integers(1, d + 1)))
        esquerdo, direito = trace_pm_sides(M, P)
        return esquerdo, direito, False, []

    if which == TipoLema.SUM_B:
        quantas = int(rng.integers(1, 5))
        B = normalize_to_identity([random_psd(rng, d) for _ in range(quantas)])
        z = random_complex_matrix(rng, 1, quantas)[0]
        esquerdo, direito = sum_b_sides(B, z)
        return esquerdo, direito, False, list(z)

    if which == TipoLema.IM_TRACE:
        R = random_complex_matrix(rng, d, d)
        M = (R + R.conj().T) / 2 + 1j * random_psd(rng, d, int(rng.integers(1, d + 1)))
        esquerdo, direito = im_trace_sides(M)
        return esquerdo, direito, False, []

    alfas = _alfas(rng, d, positive_imag)
    _, lema = squares_sides(alfas)
    return lema, bbsz_quantity(alfas), False, list(alfas)


def lemma_trials(
    which: TipoLema,
    trials: int = 1000,
    seed: int = 0,
    dim_max: int = 8,
    positive_imag: bool = False,
    tol: float = TOL_VIOLACAO
) -> VerifyReport:
    """
    Ensaios aleatórios de um lema: cada ensaio i usa a semente seed + i,
    verifica esquerdo <= direito com tolerância tol*max(1, |direito|) e, para
    Squares, verifica também que a igualdade implica d = 1 ou alfas reais.

    A margem reportada é direito - esquerdo (escala linear). positive_imag
    sorteia alfas com Im de sinal arbitrário, fora da hipótese do lema.
    """
    if trials < 1:
        raise DimensionError(f"trials tem de ser positivo, recebido {trials}")
    which = TipoLema(which)
    inicio = datetime.now()
    relatorio = VerifyReport(seed=seed, case_id=f"lema-{which.value}", theorem=which.value, n=dim_max)

    for i in range(trials):
        rng = np.random.default_rng(seed + i)
        esquerdo, direito, igualdade_falhada, entradas = _ensaio_lema(which, rng, dim_max, positive_imag)
        margem = direito - esquerdo
        violacao = margem < -tol * max(1.0, abs(direito)) or igualdade_falhada
        relatorio.trials += 1
        if margem < relatorio.worst_log_margin:
            relatorio.worst_log_margin = margem
        if violacao:
            relatorio.violations += 1
            if relatorio.witness is None:
                relatorio.witness = {'z': [complex(v) for v in entradas], 'esquerdo': esquerdo,
                                     'direito': direito, 'ensaio': i}

    relatorio.elapsed = (datetime.now() - inicio).total_seconds()
    return relatorio


# ----------------------------------------------------------------------
# Comparação
# ----------------------------------------------------------------------

class ComparisonTable:
    """
    Tabela de comparação de certificados.

    Attributes:
        teoremas (List[str]): Nome de cada certificado
        linhas (List[Dict]): Por amostra, z, log|p(z)| e o expoente de cada certificado
        mais_justo (Dict[str, int]): Quantas vezes cada certificado foi o mais justo (empates contam para todos)
    """

    def __init__(self, teoremas: List[str], linhas: List[Dict], mais_justo: Dict[str, int]):
        self.teoremas = teoremas
        self.linhas = linhas
        self.mais_justo = mais_justo

    def obter_resumo(self) -> Dict:
        total = len(self.linhas)
        return {
            'amostras': total,
            'mais_justo': dict(self.mais_justo),
            'fracao_mais_justo': {
                t: (v / total if total else 0.0) for t, v in self.mais_justo.items()
            }
        }

    def __str__(self) -> str:
        partes = ", ".join(f"{t}={v}" for t, v in self.mais_justo.items())
        return f"Comparação em {len(self.linhas)} amostras: {partes}"


def compare_bounds(
    p: MultiPoly,
    bounds: Sequence[ExpBound],
    z_samples: Sequence[Sequence[complex]],
    tol: float = 1e-12
) -> ComparisonTable:
    """
    Compara os expoentes de vários certificados nos mesmos pontos.

    Raises:
        DimensionError: Certificado com aridade diferente de p
    """
    for b in bounds:
        if b.nvars != p.nvars:
            raise DimensionError(f"Certificado {b.theorem} com {b.nvars} variáveis para p com {p.nvars}")
    nomes = [b.theorem or f"limite{k}" for k, b in enumerate(bounds)]
    Z = np.asarray(z_samples, dtype=complex).reshape(-1, p.nvars)
    modulos = np.abs(evaluate_many(p, Z))
    with np.errstate(divide='ignore'):
        logs = np.log(modulos)
    expoentes = np.stack([evaluate_log_many(b, Z) for b in bounds], axis=1) if bounds else np.zeros((len(Z), 0))

    mais_justo = {nome: 0 for nome in nomes}
    linhas = []
    for k, z in enumerate(Z):
        linha = {'z': [complex(v) for v in z], 'log_p': float(logs[k])}
        linha.update({nome: float(expoentes[k, i]) for i, nome in enumerate(nomes)})
        linhas.append(linha)
        if len(nomes):
            menor = expoentes[k].min()
            for i, nome in enumerate(nomes):
                if expoentes[k, i] <= menor + tol:
                    mais_justo[nome] += 1
    return ComparisonTable(nomes, linhas, mais_justo)


# ----------------------------------------------------------------------
# Varrimento de validade
# ----------------------------------------------------------------------

# Teoremas aplicáveis por aridade a polinómios com p(0) = 1
TEOREMAS_NORMALIZADOS = {
    1: ['original', 'improved', 'bb', 'coeffn', 'msz', 'real', 'msz2'],
    2: ['bb', 'det', 'coeff2', 'coeffn', 'msz', 'real', 'bisz2', 'msz2'],
    3: ['bb', 'coeffn', 'msz', 'real', 'msz2'],
}
# Teoremas aplicáveis a polinómios que se anulam em 0
TEOREMAS_ANULAMENTO = {
    1: ['vanishing1d', 'msz2'],
    2: ['bisz2', 'msz2'],
    3: ['msz2'],
}
# Representações determinantais com dim ker A > 0 (caminho em n variáveis)
TEOREMAS_NUCLEO = {
    2: ['bisz2', 'msz2'],
    3: ['bisz2', 'msz2'],
}
# Com anulamento em 0 (r >= 1) o limite bisz2 tem contra-exemplos: p = z1 z2
# em z = (-1 + 0.001i, -1 + 0.001i) tem |p| ~ 1 e limite e^-2. msz2 parte das
# mesmas constantes.
VIOLACAO_CONHECIDA = ('bisz2', 'msz2')


def bisz2_counterexample() -> MultiPoly:
    """p = z1 z2, que viola o limite bisz2 perto de (-1, -1)"""
    return MultiPoly(2, {(1, 1): 1.0})


def _casos(n: int, polys: int, seed: int, detrep_size: int):
    """(nome do gerador, polinómios, teoremas, opção detrep, anula-se em 0)"""
    produtos = [generate_stable_product(n, 1 + (k % 4), seed + k) for k in range(polys)]
    detreps = [generate_stable_detrep(n, detrep_size, seed + k)[1] for k in range(polys)]
    anulamento = [generate_vanishing_product(n, 1 + (k % 3), 1 + (k % 2), seed + k) for k in range(polys)]
    yield 'produto', produtos, TEOREMAS_NORMALIZADOS[n], False, False
    teoremas_det = TEOREMAS_NORMALIZADOS[n] + (['det'] if n == 3 else [])
    yield 'detrep', detreps, teoremas_det, True, False
    yield 'anulamento', anulamento, TEOREMAS_ANULAMENTO[n], False, True
    if n in TEOREMAS_NUCLEO:
        nucleos = min(2, detrep_size - 1)
        if nucleos >= 1:
            com_nucleo = [
                generate_stable_detrep(n, detrep_size, seed + k, kernel_dim=1 + k % nucleos)[1]
                for k in range(polys)
            ]
            yield 'nucleo', com_nucleo, TEOREMAS_NUCLEO[n], True, True
    if n == 2:
        yield 'contraexemplo', [bisz2_counterexample()], ['bisz2'], False, True


def validity_sweep(
    arities: Sequence[int] = (1, 2, 3),
    polys: int = 10,
    samples: int = 200,
    seed: int = 0,
    radius: float = 2.0,
    tol: float = TOL_VIOLACAO,
    detrep_size: int = 3
) -> List[VerifyReport]:
    """
    Verifica todos os certificados aplicáveis sobre os dois geradores, sobre
    produtos que se anulam em 0, sobre representações determinantais com
    núcleo e sobre o contra-exemplo z1 z2. Um relatório por (aridade,
    gerador, teorema).

    As linhas de bisz2 e msz2 em polinómios que se anulam em 0 são marcadas
    ESPERADO_VIOLACAO: as violações são contadas e reportadas, mas a linha
    continua aceite.
    """
    relatorios = []
    for n in arities:
        if n not in TEOREMAS_NORMALIZADOS:
            raise DimensionError(f"Aridade {n} fora de {sorted(TEOREMAS_NORMALIZADOS)}")
        for gerador, polinomios, teoremas, detrep, anula in _casos(n, polys, seed, detrep_size):
            for teorema in teoremas:
                opcoes = {'certificado_detrep': True} if detrep and teorema in ('det', 'bisz2') else {}
                esperado = ESPERADO_VIOLACAO if anula and teorema in VIOLACAO_CONHECIDA else ESPERADO_VALIDO
                parciais = []
                for k, p in enumerate(polinomios):
                    b = compute_bound(teorema, p, **opcoes)
                    real = b.domain == Dominio.REAIS
                    parciais.append(verify_bound(
                        p, b, radius=radius, upper_half=not real, real_only=real,
                        samples=samples, seed=seed + k, tol=tol
                    ))
                caso = f"n{n}-{gerador}-{teorema}"
                relatorio = _agregar(
                    parciais, seed=seed, case_id=caso, theorem=teorema, n=n, expected=esperado
                )
                if relatorio.accepted:
                    logger.info(str(relatorio))
                else:
                    logger.warning(str(relatorio))
                relatorios.append(relatorio)
    return relatorios


# ----------------------------------------------------------------------
# Escrita de relatórios
# ----------------------------------------------------------------------

def write_csv(relatorios: Sequence[VerifyReport], filepath: str, config: Optional[Dict] = None):
    with open(filepath, 'w', encoding='utf-8', newline='') as f:
        if config is not None:
            f.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
        escritor = csv.DictWriter(f, fieldnames=COLUNAS_CSV)
        escritor.writeheader()
        for r in relatorios:
            escritor.writerow(r.para_linha())


def write_json(relatorios: Sequence[VerifyReport], filepath: str, config: Optional[Dict] = None):
    dados = {
        'config': config or {},
        'reports': [
            {**r.para_linha(), 'worst_margin': _numero_json(r.worst_log_margin)}
            for r in relatorios
        ]
    }
    with open(filepath, 'w', encoding='utf-8') as f:
        json.dump(dados, f, indent=2, sort_keys=True)
