import logging
import math
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.detrep import DetRep, detrep_to_poly
from src.core.poly_core import MultiPoly, evaluate, evaluate_many, product
from src.utils.utils import (
    DimensionError,
    HypothesisError,
    NumericalError,
    random_complex_matrix,
    normalize_to_identity,
    random_psd,
)

logger = logging.getLogger(__name__)

TOL_RAIZES = 1e-9
PASSOS_NEWTON = 5
MAX_TENTATIVAS_GERADOR = 20
PASSOS_MINIMIZACAO = 50
ITERACOES_SECCAO_DOURADA = 60
BLOCO_AMOSTRAGEM = 10000
RAZAO_DOURADA = (math.sqrt(5) - 1) / 2


class EstadoEstabilidade(Enum):
    """Resultado de um teste de estabilidade"""
    ESTAVEL = "stable"
    INSTAVEL = "unstable"
    DESCONHECIDO = "unknown"


class StabilityVerdict:
    """
    Veredicto de estabilidade.

    Attributes:
        status (EstadoEstabilidade): Estável, instável ou desconhecido
        witness (Optional[List[complex]]): Ponto do polidisco superior aberto com |p| pequeno
        roots (Optional[List[complex]]): Raízes (apenas numa variável)
    """

    def __init__(
        self,
        status: EstadoEstabilidade,
        witness: Optional[Sequence[complex]] = None,
        roots: Optional[Sequence[complex]] = None
    ):
        self.status = status
        self.witness = [complex(v) for v in witness] if witness is not None else None
        self.roots = [complex(r) for r in roots] if roots is not None else None

    @property
    def is_stable(self) -> bool:
        return self.status == EstadoEstabilidade.ESTAVEL

    @property
    def is_unstable(self) -> bool:
        return self.status == EstadoEstabilidade.INSTAVEL

    def obter_resumo(self) -> Dict:
        """Retorna um resumo do veredicto"""
        return {
            'estado': self.status.value,
            'testemunha': [[z.real, z.imag] for z in self.witness] if self.witness else None,
            'raizes': [[r.real, r.imag] for r in self.roots] if self.roots is not None else None
        }

    def __str__(self) -> str:
        if self.is_unstable and self.witness:
            return f"Instável: testemunha {self.witness}"
        return f"Veredicto: {self.status.value}"


# ----------------------------------------------------------------------
# Uma variável
# ----------------------------------------------------------------------

def _companheira(coefs: List[complex]) -> np.ndarray:
    """Matriz companheira da normalização mónica de sum coefs[k] z^k"""
    grau = len(coefs) - 1
    monico = np.array(coefs[:-1], dtype=complex) / coefs[-1]
    C = np.zeros((grau, grau), dtype=complex)
    C[1:, :-1] = np.eye(grau - 1)
    C[:, -1] = -monico
    return C


def roots_1d(p: MultiPoly, polir: bool = True) -> List[complex]:
    """
    Todas as raízes de um polinómio numa variável, com multiplicidade.

    Valores próprios da matriz companheira, seguidos de até PASSOS_NEWTON
    iterações de Newton; cada passo só é aceite quando reduz o resíduo.

    Args:
        p: Polinómio numa variável com grau >= 1
        polir: Aplica o polimento de Newton

    Returns:
        List[complex]: Raízes ordenadas por (parte real, parte imaginária)

    Raises:
        DimensionError: p não é numa variável
        HypothesisError: p nulo ou constante
    """
    if p.nvars != 1:
        raise DimensionError("roots_1d exige um polinómio numa variável")
    if p.total_degree < 1:
        raise HypothesisError("Polinómio nulo ou constante não tem raízes isoladas")

    coefs = p.coeffs_1d()
    grau = len(coefs) - 1
    raizes = np.linalg.eigvals(_companheira(coefs))

    descendentes = np.array(coefs[::-1], dtype=complex)
    derivada = np.polyder(descendentes)
    if polir:
        for k in range(len(raizes)):
            for _ in range(PASSOS_NEWTON):
                valor = np.polyval(descendentes, raizes[k])
                inclinacao = np.polyval(derivada, raizes[k])
                if valor == 0 or inclinacao == 0:
                    break
                candidata = raizes[k] - valor / inclinacao
                if abs(np.polyval(descendentes, candidata)) >= abs(valor):
                    break
                raizes[k] = candidata

    maximo = max(abs(c) for c in coefs)
    for r in raizes:
        residuo = abs(np.polyval(descendentes, r))
        limite = 1e-6 * (1 + maximo) * (1 + abs(r)) ** grau
        if residuo > limite:
            logger.warning(f"Raiz {r:.6g} com resíduo {residuo:.3e} acima de {limite:.3e}")

    return sorted((complex(r) for r in raizes), key=lambda r: (r.real, r.imag))


def root_error_radius(p: MultiPoly, raiz: complex) -> float:
    """
    Raio de erro a posteriori de uma raiz calculada (estimativa de Wilkinson):

        (|p(r)| + 2 (d + 1) eps sum_k |a_k| |r|^k) / |p'(r)|

    Uma raiz verdadeira do polinómio dado está a esta distância de r, em
    primeira ordem. Devolve inf quando p'(r) = 0.
    """
    if p.nvars != 1:
        raise DimensionError("root_error_radius exige um polinómio numa variável")
    descendentes = np.array(p.coeffs_1d()[::-1], dtype=complex)
    grau = len(descendentes) - 1
    inclinacao = abs(np.polyval(np.polyder(descendentes), raiz))
    if inclinacao == 0:
        return math.inf
    arredondamento = 2 * (grau + 1) * np.finfo(float).eps * np.polyval(np.abs(descendentes), abs(raiz))
    return float((abs(np.polyval(descendentes, raiz)) + arredondamento) / inclinacao)


def is_stable_1d(p: MultiPoly, tol: float = TOL_RAIZES) -> StabilityVerdict:
    """
    Estável se nenhuma raiz tem parte imaginária > tol.

    Uma raiz com parte imaginária > tol só é testemunha de instabilidade se
    a parte imaginária exceder também tol + root_error_radius; se nenhuma
    raiz for testemunha mas alguma ficar dentro do seu raio de erro, o
    veredicto é desconhecido (polinómios de grau alto com raízes agrupadas).

    As constantes não nulas são estáveis. O polinómio nulo anula-se em todo
    o semiplano e é devolvido como instável com testemunha i.
    """
    if p.nvars != 1:
        raise DimensionError("is_stable_1d exige um polinómio numa variável")
    if p.is_zero:
        return StabilityVerdict(EstadoEstabilidade.INSTAVEL, witness=[1j], roots=[])
    if p.total_degree == 0:
        return StabilityVerdict(EstadoEstabilidade.ESTAVEL, roots=[])

    raizes = roots_1d(p)
    superiores = [r for r in raizes if r.imag > tol]
    certificadas = [r for r in superiores if r.imag > tol + root_error_radius(p, r)]
    if certificadas:
        pior = max(certificadas, key=lambda r: r.imag)
        return StabilityVerdict(EstadoEstabilidade.INSTAVEL, witness=[pior], roots=raizes)
    if superiores:
        logger.warning(
            f"{len(superiores)} raízes no semiplano superior dentro do raio de erro; "
            f"maior parte imaginária {max(r.imag for r in superiores):.3g}"
        )
        return StabilityVerdict(EstadoEstabilidade.DESCONHECIDO, roots=raizes)
    return StabilityVerdict(EstadoEstabilidade.ESTAVEL, roots=raizes)


# ----------------------------------------------------------------------
# Geradores certificados
# ----------------------------------------------------------------------

def generate_stable_product(nvars: int, nfactors: int, rng_seed: int) -> MultiPoly:
    """
    Produto prod_k (1 + sum_j alpha_kj z_j) com alpha_kj uniformes em [0, 2].

    Os coeficientes são não negativos: com sinais mistos a estabilidade
    perde-se (1 + z1 - z2 anula-se no bidisco superior).
    """
    if nvars < 1:
        raise DimensionError(f"nvars tem de ser positivo, recebido {nvars}")
    if nfactors < 0:
        raise DimensionError(f"nfactors não pode ser negativo, recebido {nfactors}")
    rng = np.random.default_rng(rng_seed)
    alfas = rng.uniform(0.0, 2.0, (nfactors, nvars))
    return product((MultiPoly.linear(1.0, linha) for linha in alfas), nvars)


def generate_vanishing_product(nvars: int, nfactors: int, order: int, rng_seed: int) -> MultiPoly:
    """
    Produto estável que se anula com ordem `order` em 0: `order` formas
    lineares sum_j alpha_j z_j (alpha_j > 0) vezes um produto de
    generate_stable_product.
    """
    if order < 0:
        raise DimensionError(f"A ordem não pode ser negativa, recebido {order}")
    rng = np.random.default_rng(rng_seed)
    formas = [
        MultiPoly.linear(0.0, rng.uniform(0.1, 2.0, nvars))
        for _ in range(order)
    ]
    base = generate_stable_product(nvars, nfactors, int(rng.integers(0, 2**31)))
    return product(formas, nvars) * base


def _unitaria_aleatoria(rng: np.random.Generator, d: int) -> np.ndarray:
    Q, R = np.linalg.qr(random_complex_matrix(rng, d, d))
    fases = np.diag(R) / np.abs(np.diag(R))
    return Q * fases[None, :]


def generate_stable_detrep(
    nvars: int,
    size: int,
    rng_seed: int,
    kernel_dim: int = 0,
    normalizar: bool = True
) -> Tuple[DetRep, MultiPoly]:
    """
    Gera uma representação determinantal aleatória e o polinómio expandido.

    A = U diag(0_s, R + i W W*) U* com R hermítica, pelo que Im A >= 0 e
    dim ker A = s (kernel_dim). B_j = S^-1/2 G_j S^-1/2 com G_j = W_j W_j* e
    S = sum G_j, logo B_j >= 0 e sum B_j = I. Para z no polidisco superior
    aberto Im(A + sum z_j B_j) >= min_j Im z_j I > 0, logo p é estável.

    Args:
        nvars: Número de variáveis
        size: Tamanho d das matrizes
        rng_seed: Semente
        kernel_dim: Dimensão do núcleo de A (ordem de anulamento de p em 0)
        normalizar: Escolhe c com p(0) = 1 (ou c = 1/det C quando s > 0)

    Returns:
        Tuple: (DetRep, polinómio expandido)

    Raises:
        DimensionError: size < 1 ou kernel_dim fora de [0, size]
        NumericalError: S singular em todas as tentativas
    """
    if size < 1 or nvars < 1:
        raise DimensionError(f"size e nvars têm de ser positivos, recebido {size}, {nvars}")
    if not 0 <= kernel_dim <= size:
        raise DimensionError(f"kernel_dim {kernel_dim} fora de [0, {size}]")

    rng = np.random.default_rng(rng_seed)
    for tentativa in range(MAX_TENTATIVAS_GERADOR):
        k = size - kernel_dim
        R = random_complex_matrix(rng, k, k)
        C = (R + R.conj().T) / 2 + 1j * random_psd(rng, k)
        U = _unitaria_aleatoria(rng, size)
        bloco = np.zeros((size, size), dtype=complex)
        bloco[kernel_dim:, kernel_dim:] = C
        A = U @ bloco @ U.conj().T

        G = [random_psd(rng, size) for _ in range(nvars)]
        S = sum(G)
        menor = float(np.linalg.eigvalsh((S + S.conj().T) / 2)[0])
        if menor <= 1e-8 * float(np.linalg.norm(S, 2)):
            logger.warning(f"S quase singular na tentativa {tentativa + 1}, a gerar de novo")
            continue

        B = normalize_to_identity(G)
        c = 1 / np.linalg.det(C) if normalizar and k > 0 else 1.0
        rep = DetRep(c, A, B)
        return rep, detrep_to_poly(rep)

    raise NumericalError(
        f"Não foi possível gerar S invertível em {MAX_TENTATIVAS_GERADOR} tentativas"
    )


# ----------------------------------------------------------------------
# Refutação heurística
# ----------------------------------------------------------------------

def _seccao_dourada(f, a: float, b: float, iteracoes: int) -> float:
    x1 = b - RAZAO_DOURADA * (b - a)
    x2 = a + RAZAO_DOURADA * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iteracoes):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - RAZAO_DOURADA * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + RAZAO_DOURADA * (b - a)
            f2 = f(x2)
    return x1 if f1 <= f2 else x2


def _minimizar_local(p: MultiPoly, z: np.ndarray, radius: float, limiar: float) -> Tuple[np.ndarray, float]:
    """
    Refinamento coordenada a coordenada de |p| por secção dourada nas partes
    real e imaginária. As partes imaginárias ficam em [radius/20, radius].
    """
    z = z.copy()
    melhor = abs(evaluate(p, z))
    y_min = radius / 20
    for _ in range(PASSOS_MINIMIZACAO):
        if melhor < limiar:
            break
        for j in range(p.nvars):
            for parte_imag, (a, b) in ((False, (-radius, radius)), (True, (y_min, radius))):
                def f(t: float) -> float:
                    w = z.copy()
                    w[j] = complex(w[j].real, t) if parte_imag else complex(t, w[j].imag)
                    return abs(evaluate(p, w))

                t = _seccao_dourada(f, a, b, ITERACOES_SECCAO_DOURADA)
                valor = f(t)
                if valor < melhor:
                    melhor = valor
                    z[j] = complex(z[j].real, t) if parte_imag else complex(t, z[j].imag)
    return z, melhor


def refute_stability(
    p: MultiPoly,
    radius: float = 2.0,
    samples: int = 10000,
    rng_seed: int = 0,
    tol: float = 1e-9
) -> StabilityVerdict:
    """
    Procura heurística de zeros no polidisco superior aberto.

    Amostra z com |x_j| <= radius e 0 < y_j <= radius, refina por
    minimização local a partir das melhores amostras interiores
    (min_j y_j >= radius/20) e declara instável se |p| < tol*max|coef|.
    Nunca devolve estável para nvars >= 2. Numa variável devolve o veredicto
    de is_stable_1d, que pode ser estável (p = 1 é estável): é o único caso
    em que o resultado não é apenas instável ou desconhecido.
    """
    if samples < 1:
        raise DimensionError(f"samples tem de ser positivo, recebido {samples}")
    if p.nvars == 1:
        # Decisão completa pelas raízes; inclui o veredicto estável
        return is_stable_1d(p)
    if p.is_zero:
        return StabilityVerdict(EstadoEstabilidade.INSTAVEL, witness=[0.5j * radius] * p.nvars)

    n = p.nvars
    rng = np.random.default_rng(rng_seed)
    limiar = tol * p.max_abs_coefficient()
    y_min = radius / 20

    pontos, valores = [], []
    for inicio in range(0, samples, BLOCO_AMOSTRAGEM):
        m = min(BLOCO_AMOSTRAGEM, samples - inicio)
        X = rng.uniform(-radius, radius, (m, n))
        Y = radius * (1.0 - rng.uniform(0.0, 1.0, (m, n)))
        Z = X + 1j * Y
        interiores = Y.min(axis=1) >= y_min
        if not interiores.any():
            continue
        Z = Z[interiores]
        pontos.append(Z)
        valores.append(np.abs(evaluate_many(p, Z)))

    if not pontos:
        return StabilityVerdict(EstadoEstabilidade.DESCONHECIDO)
    Z = np.concatenate(pontos)
    valores = np.concatenate(valores)

    for indice in np.argsort(valores, kind='stable')[:3]:
        if valores[indice] < limiar:
            return StabilityVerdict(EstadoEstabilidade.INSTAVEL, witness=Z[indice])
        z, melhor = _minimizar_local(p, Z[indice], radius, limiar)
        if melhor < limiar:
            logger.info(f"Zero aproximado encontrado com |p| = {melhor:.3e}")
            return StabilityVerdict(EstadoEstabilidade.INSTAVEL, witness=z)
    return StabilityVerdict(EstadoEstabilidade.DESCONHECIDO)


# ----------------------------------------------------------------------
# Propriedades tipo Pólya
# ----------------------------------------------------------------------

def check_reflection(p: MultiPoly, z: Sequence[complex]) -> Tuple[float, float]:
    """
    (|p(x+iy)|, max sobre os 2^n sinais de |p(x +- iy)|).

    Para p estável o primeiro valor é o máximo.
    """
    z = np.asarray(z, dtype=complex)
    if z.shape != (p.nvars,):
        raise DimensionError(f"Ponto com {z.size} coordenadas para {p.nvars} variáveis")
    x, y = z.real, z.imag
    sinais = np.array(
        [[1 - 2 * ((mascara >> j) & 1) for j in range(p.nvars)] for mascara in range(2 ** p.nvars)],
        dtype=float
    )
    valores = np.abs(evaluate_many(p, x[None, :] + 1j * sinais * y[None, :]))
    return float(valores[0]), float(valores.max())


def check_y_monotonicity(
    p: MultiPoly,
    x: Sequence[float],
    y: Sequence[float],
    y_til: Sequence[float]
) -> Tuple[float, float]:
    """
    (|p(x+iy)|, |p(x+i*y_til)|) com 0 <= y <= y_til. Para p estável o
    primeiro não excede o segundo.

    Raises:
        HypothesisError: 0 <= y <= y_til falha em alguma coordenada
    """
    x, y, y_til = (np.asarray(v, dtype=float) for v in (x, y, y_til))
    if not (x.shape == y.shape == y_til.shape == (p.nvars,)):
        raise DimensionError("x, y e y_til têm de ter nvars coordenadas")
    if np.any(y < 0) or np.any(y > y_til):
        raise HypothesisError("É necessário 0 <= y <= y_til em cada coordenada")
    return abs(evaluate(p, x + 1j * y)), abs(evaluate(p, x + 1j * y_til))


def sharpness_factors(c1: float, c2: float, n: int) -> Tuple[MultiPoly, MultiPoly, int]:
    """
    Fatores da família p_n(z) = (1 + c1 z/n)^n (1 - d_n z^2/n)^n com
    gamma = (c1^2 - 2 c2)/2 e d_n = gamma - c1^2/(2n).

    Returns:
        Tuple: (1 + c1 z/n, 1 - d_n z^2/n, multiplicidade n)

    Raises:
        HypothesisError: gamma <= 0 ou d_n < 0
    """
    gama = (c1 ** 2 - 2 * c2) / 2
    if gama <= 0:
        raise HypothesisError(f"gamma = {gama:.6g} tem de ser positivo")
    if n < 1:
        raise DimensionError(f"n tem de ser positivo, recebido {n}")
    d_n = gama - c1 ** 2 / (2 * n)
    if d_n < 0:
        raise HypothesisError(f"d_n = {d_n:.6g} < 0 para n = {n}; escolha n maior")
    return (
        MultiPoly.from_coeffs_1d([1.0, c1 / n]),
        MultiPoly.from_coeffs_1d([1.0, 0.0, -d_n / n]),
        n
    )
