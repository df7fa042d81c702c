import json
import logging
import math
from enum import Enum
from typing import Dict, Optional, Sequence

import numpy as np

from src.core.poly_core import (
    HomogeneousExpansion,
    MultiPoly,
    gradient_at_zero,
    hessian_at_zero,
    homog_data_at_ones,
    homogeneous_parts,
)
from src.utils.utils import (
    DimensionError,
    HypothesisError,
    complex_to_pair,
    operator_norm_symmetric,
    pair_to_complex,
)

logger = logging.getLogger(__name__)

TOL_NORMALIZACAO = 1e-10
TOL_REAL = 1e-12
TOL_P_R = 1e-12

# B = 2^(n-1) sqrt(2e^2 - e)/(e - 1), constante de Borcea-Brändén
FATOR_BB = math.sqrt(2 * math.e ** 2 - math.e) / (math.e - 1)


class TipoNorma(Enum):
    """Norma N(z) usada no certificado"""
    SUP = "sup"
    EUCLID = "euclid"


class Dominio(Enum):
    """Pontos onde o certificado pode ser avaliado"""
    TODOS = "all"
    REAIS = "real"


class ExpBound:
    """
    Certificado exponencial unificado:

        log|p(z)| <= r log N(z) + c0 + Re sum_j c_j z_j + kappa N(z) + lambda N(z)^2

    Attributes:
        lead_degree (int): r, expoente do fator N(z)^r
        log_prefactor (float): c0
        linear_complex (List[complex]): c
        linear_abs (float): kappa >= 0
        quad (float): lambda (pode ser negativo)
        norm_kind (TipoNorma): Norma sup ou euclidiana
        domain (Dominio): Todos os pontos ou apenas pontos reais
        theorem (str): Nome do avaliador que produziu o certificado
    """

    def __init__(
        self,
        nvars: int,
        lead_degree: int = 0,
        log_prefactor: float = 0.0,
        linear_complex: Optional[Sequence[complex]] = None,
        linear_abs: float = 0.0,
        quad: float = 0.0,
        norm_kind: TipoNorma = TipoNorma.EUCLID,
        domain: Dominio = Dominio.TODOS,
        theorem: str = ''
    ):
        if lead_degree < 0:
            raise HypothesisError(f"lead_degree tem de ser >= 0, recebido {lead_degree}")
        if linear_abs < 0:
            raise HypothesisError(f"linear_abs tem de ser >= 0, recebido {linear_abs}")
        self.lead_degree = int(lead_degree)
        self.log_prefactor = float(log_prefactor)
        self.linear_complex = (
            [complex(c) for c in linear_complex] if linear_complex is not None
            else [0j] * nvars
        )
        if len(self.linear_complex) != nvars:
            raise DimensionError(
                f"linear_complex com {len(self.linear_complex)} entradas para {nvars} variáveis"
            )
        self.linear_abs = float(linear_abs)
        self.quad = float(quad)
        self.norm_kind = norm_kind
        self.domain = domain
        self.theorem = theorem

    @property
    def nvars(self) -> int:
        return len(self.linear_complex)

    def norm(self, z: np.ndarray) -> np.ndarray:
        """N(z) por linha de uma matriz (npontos, nvars)"""
        if self.norm_kind == TipoNorma.SUP:
            return np.abs(z).max(axis=-1)
        return np.sqrt((np.abs(z) ** 2).sum(axis=-1))

    def para_dict(self) -> Dict:
        return {
            'lead_degree': self.lead_degree,
            'log_prefactor': self.log_prefactor,
            'linear_complex': [complex_to_pair(c) for c in self.linear_complex],
            'linear_abs': self.linear_abs,
            'quad': self.quad,
            'norm': self.norm_kind.value,
            'domain': self.domain.value,
            'theorem': self.theorem
        }

    @classmethod
    def de_dict(cls, dados: Dict) -> 'ExpBound':
        linear = [pair_to_complex(par) for par in dados['linear_complex']]
        return cls(
            nvars=len(linear),
            lead_degree=int(dados['lead_degree']),
            log_prefactor=float(dados['log_prefactor']),
            linear_complex=linear,
            linear_abs=float(dados['linear_abs']),
            quad=float(dados['quad']),
            norm_kind=TipoNorma(dados['norm']),
            domain=Dominio(dados['domain']),
            theorem=dados.get('theorem', '')
        )

    def salvar_json(self, filepath: str):
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(self.para_dict(), f, indent=2)

    @classmethod
    def carregar_json(cls, filepath: str) -> 'ExpBound':
        with open(filepath, 'r', encoding='utf-8') as f:
            return cls.de_dict(json.load(f))

    def __eq__(self, outro) -> bool:
        if not isinstance(outro, ExpBound):
            return NotImplemented
        return self.para_dict() == outro.para_dict()

    def __str__(self) -> str:
        c = ", ".join(f"{v:.6g}" for v in self.linear_complex)
        return (
            f"{self.theorem or 'ExpBound'}: r={self.lead_degree}, c0={self.log_prefactor:.6g}, "
            f"c=({c}), kappa={self.linear_abs:.6g}, lambda={self.quad:.6g}, "
            f"N={self.norm_kind.value}, dominio={self.domain.value}"
        )


# ----------------------------------------------------------------------
# Avaliação
# ----------------------------------------------------------------------

def evaluate_log_many(b: ExpBound, Z: np.ndarray) -> np.ndarray:
    """
    Expoente do certificado em vários pontos. Devolve -inf onde r > 0 e N(z) = 0.

    Raises:
        DimensionError: Pontos com número de coordenadas errado
        HypothesisError: Pontos não reais num certificado só para pontos reais
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if Z.shape[1] != b.nvars:
        raise DimensionError(f"Pontos com {Z.shape[1]} coordenadas para {b.nvars} variáveis")
    if b.domain == Dominio.REAIS and np.any(np.abs(Z.imag) > TOL_REAL):
        raise HypothesisError("Certificado válido apenas em pontos reais")

    N = b.norm(Z)
    linear = (Z @ np.array(b.linear_complex, dtype=complex)).real
    expoente = b.log_prefactor + linear + b.linear_abs * N + b.quad * N ** 2
    if b.lead_degree > 0:
        with np.errstate(divide='ignore'):
            expoente = expoente + b.lead_degree * np.log(N)
        expoente = np.where(N == 0, -np.inf, expoente)
    return expoente


def evaluate_log(b: ExpBound, z: Sequence[complex]) -> float:
    return float(evaluate_log_many(b, np.asarray(z, dtype=complex)[None, :])[0])


# ----------------------------------------------------------------------
# Auxiliares
# ----------------------------------------------------------------------

def _verificar_normalizacao(p: MultiPoly):
    if abs(p.constant_term - 1) > TOL_NORMALIZACAO:
        raise HypothesisError(f"É necessário p(0) = 1, recebido p(0) = {p.constant_term:.6g}")


def _verificar_uma_variavel(p: MultiPoly):
    if p.nvars != 1:
        raise DimensionError(f"Esperado polinómio numa variável, recebido nvars={p.nvars}")


def _soma_quadraticos(p: MultiPoly, termo) -> float:
    """
    sum_{j,k} termo(a(e_j + e_k)) sobre pares ordenados: fora da diagonal
    cada coeficiente conta duas vezes, na diagonal entra a(2e_j).
    """
    n = p.nvars
    total = 0.0
    for j in range(n):
        for k in range(n):
            exp = [0] * n
            exp[j] += 1
            exp[k] += 1
            total += termo(p.coefficient(exp))
    return total


def _norma_re_hessiana(p: MultiPoly) -> float:
    return operator_norm_symmetric(hessian_at_zero(p).real)


# ----------------------------------------------------------------------
# Uma variável
# ----------------------------------------------------------------------

def szasz_original(p: MultiPoly) -> ExpBound:
    """|p(z)| <= exp(|z||c1| + 3|z|^2 (|c1|^2 + |c2|))"""
    _verificar_uma_variavel(p)
    _verificar_normalizacao(p)
    c1, c2 = p.coefficient((1,)), p.coefficient((2,))
    return ExpBound(
        1,
        linear_abs=abs(c1),
        quad=3 * (abs(c1) ** 2 + abs(c2)),
        theorem='original'
    )


def szasz_improved(p: MultiPoly) -> ExpBound:
    """log|p(z)| <= Re(p1 z) + (|p1|^2 - 2 Re p2)|z|^2 / 2"""
    _verificar_uma_variavel(p)
    _verificar_normalizacao(p)
    p1, p2 = p.coefficient((1,)), p.coefficient((2,))
    return ExpBound(
        1,
        linear_complex=[p1],
        quad=(abs(p1) ** 2 - 2 * p2.real) / 2,
        theorem='improved'
    )


def szasz_1d_vanishing(p: MultiPoly, k: Optional[int] = None) -> ExpBound:
    """
    Caso p(0) = 0 numa variável, com p = p_k z^k + ... e log|z|^k
    substituído por k(|z| - 1).

    Args:
        p: Polinómio numa variável
        k: Ordem de anulamento (calculada a partir de p se omitida)

    Raises:
        HypothesisError: p_k = 0 na ordem declarada
    """
    _verificar_uma_variavel(p)
    if k is None:
        k = homogeneous_parts(p).vanishing_order
    p_k = p.coefficient((k,))
    if abs(p_k) <= TOL_P_R * max(1.0, p.max_abs_coefficient()):
        raise HypothesisError(f"Coeficiente p_{k} nulo: a ordem declarada está errada")
    if any(exp[0] < k for exp in p.terms):
        raise HypothesisError(f"p tem termos de grau inferior a k = {k}")
    q1 = p.coefficient((k + 1,)) / p_k
    q2 = p.coefficient((k + 2,)) / p_k
    return ExpBound(
        1,
        log_prefactor=math.log(abs(p_k)) - k,
        linear_complex=[q1],
        linear_abs=k,
        quad=(abs(q1) ** 2 - 2 * q2.real) / 2,
        theorem='vanishing1d'
    )


def necessity_quantity(p: MultiPoly) -> float:
    """c1^2 - 2 c2 de um polinómio real estável com p(0) = 1; nunca negativo"""
    _verificar_uma_variavel(p)
    _verificar_normalizacao(p)
    if any(abs(c.imag) > TOL_REAL for c in p.terms.values()):
        raise HypothesisError("necessity_quantity exige coeficientes reais")
    c1, c2 = p.coefficient((1,)).real, p.coefficient((2,)).real
    return c1 ** 2 - 2 * c2


def bbsz_quantity(alphas: Sequence[complex]) -> float:
    """Majorante 3|p1|^2 + 2|p2| de sum_j |alpha_j|^2, com p = prod (1 + alpha_j z)"""
    alfas = np.asarray(alphas, dtype=complex)
    p1 = alfas.sum()
    p2 = (p1 ** 2 - (alfas ** 2).sum()) / 2
    return float(3 * abs(p1) ** 2 + 2 * abs(p2))


# ----------------------------------------------------------------------
# Várias variáveis, p(0) = 1
# ----------------------------------------------------------------------

def bb_bound(p: MultiPoly) -> ExpBound:
    """
    |p(z)| <= B exp(C ||z||_inf^2) com B = 2^(n-1) sqrt(2e^2 - e)/(e - 1) e
    C = 6e^2 (sum_i |a(e_i)|)^2 + 4e^2 sum_{i,j} |a(e_i + e_j)|.
    """
    _verificar_normalizacao(p)
    n = p.nvars
    e2 = math.e ** 2
    lineares = sum(abs(v) for v in gradient_at_zero(p))
    quadraticos = _soma_quadraticos(p, abs)
    return ExpBound(
        n,
        log_prefactor=(n - 1) * math.log(2) + math.log(FATOR_BB),
        quad=6 * e2 * lineares ** 2 + 4 * e2 * quadraticos,
        norm_kind=TipoNorma.SUP,
        theorem='bb'
    )


def det_bound(p: MultiPoly, certificado_detrep: bool = False) -> ExpBound:
    """
    log|p(z)| <= Re sum_j p_j(0) z_j
                 + ||z||_inf^2 (|sum_j p_j(0)|^2 - Re sum_{j,k} p_jk(0)) / 2

    Válido para p estável em duas variáveis. Com certificado_detrep=True
    aceita n variáveis quando p vem de uma representação determinantal.
    """
    _verificar_normalizacao(p)
    if p.nvars != 2 and not certificado_detrep:
        raise DimensionError(
            "det_bound exige duas variáveis; use certificado_detrep=True para "
            "polinómios com representação determinantal"
        )
    g = gradient_at_zero(p)
    H = hessian_at_zero(p)
    return ExpBound(
        p.nvars,
        linear_complex=g,
        quad=(abs(g.sum()) ** 2 - H.sum().real) / 2,
        norm_kind=TipoNorma.SUP,
        theorem='det'
    )


def _coeficientes_corolario(p: MultiPoly, fator: float, teorema: str) -> ExpBound:
    _verificar_normalizacao(p)
    lineares = sum(abs(v) for v in gradient_at_zero(p))
    quadraticos = _soma_quadraticos(p, lambda c: abs(c.real))
    return ExpBound(
        p.nvars,
        log_prefactor=0.5,
        quad=fator * (lineares ** 2 + quadraticos),
        norm_kind=TipoNorma.SUP,
        theorem=teorema
    )


def two_var_coeff_bound(p: MultiPoly) -> ExpBound:
    """sqrt(e) exp(C ||z||^2), C = (sum |a(e_j)|)^2 + sum_{j,k} |Re a(e_j + e_k)|"""
    if p.nvars != 2:
        raise DimensionError(f"two_var_coeff_bound exige duas variáveis, recebido {p.nvars}")
    return _coeficientes_corolario(p, 1.0, 'coeff2')


def nvar_coeff_bound(p: MultiPoly) -> ExpBound:
    """sqrt(e) exp(C ||z||^2), C = 2(sum |a(e_j)|)^2 + 2 sum_{j,k} |Re a(e_j + e_k)|"""
    return _coeficientes_corolario(p, 2.0, 'coeffn')


def msz_bound(p: MultiPoly) -> ExpBound:
    """
    log|p(z)| <= sqrt(2)|grad p(0)||z| + (|grad p(0)|^2 + ||Re Hp(0)||)|z|^2

    A norma de operador de Re Hp(0) é o maior valor próprio em módulo,
    calculado por rotações de Jacobi.
    """
    _verificar_normalizacao(p)
    gradiente = float(np.linalg.norm(gradient_at_zero(p)))
    return ExpBound(
        p.nvars,
        linear_abs=math.sqrt(2) * gradiente,
        quad=gradiente ** 2 + _norma_re_hessiana(p),
        theorem='msz'
    )


def real_axis_bound(p: MultiPoly) -> ExpBound:
    """log|p(x)| <= Re(grad p(0) . x) + (|grad p(0)|^2 + ||Re Hp(0)||)|x|^2 / 2, x real"""
    _verificar_normalizacao(p)
    g = gradient_at_zero(p)
    gradiente = float(np.linalg.norm(g))
    return ExpBound(
        p.nvars,
        linear_complex=g,
        quad=(gradiente ** 2 + _norma_re_hessiana(p)) / 2,
        domain=Dominio.REAIS,
        theorem='real'
    )


# ----------------------------------------------------------------------
# Anulamento em 0
# ----------------------------------------------------------------------

def _dados_ordem(p: MultiPoly, h: Optional[HomogeneousExpansion]):
    """(r, P_r(1), grad P_r(1), P_r+1(1), grad P_r+1(1), P_r+2(1))"""
    h = homogeneous_parts(p) if h is None else h
    if h.nvars != p.nvars:
        raise DimensionError("Expansão homogénea com número de variáveis diferente de p")
    r = h.vanishing_order
    P_r, grad_r = homog_data_at_ones(h, r)
    if abs(P_r) <= TOL_P_R * max(1.0, p.max_abs_coefficient()):
        raise HypothesisError(f"P_r(1) = 0 para r = {r}: o certificado não está definido")
    P_r1, grad_r1 = homog_data_at_ones(h, r + 1)
    P_r2, _ = homog_data_at_ones(h, r + 2)
    return r, P_r, grad_r, P_r1, grad_r1, P_r2


def bisz2_bound(
    p: MultiPoly,
    h: Optional[HomogeneousExpansion] = None,
    certificado_detrep: bool = False
) -> ExpBound:
    """
    |p(z)| <= |P_r(1)| e^(-r/2) exp(Re sum_j c_j z_j + B ||z||_inf^2) com

        c_j = [dP_r/dz_j(1)(1 - P_r+1(1)/P_r(1)) + dP_r+1/dz_j(1)] / P_r(1)
        B   = (|P_r+1(1)/P_r(1)|^2 - 2 Re(P_r+2(1)/P_r(1)) + r) / 2

    Com r >= 1 o limite não é válido em geral: para p = z1 z2 (c = (1, 1),
    B = 1) em z = (-1 + 0.001i, -1 + 0.001i) dá e^-2 contra |p| ~ 1. As
    constantes ficam como enunciadas e o varrimento marca estes casos como
    violação conhecida.

    Args:
        p: Polinómio estável em duas variáveis
        h: Expansão homogénea de p (calculada se omitida)
        certificado_detrep: Aceita n variáveis para p com representação determinantal

    Raises:
        HypothesisError: P_r(1) = 0
    """
    if p.nvars != 2 and not certificado_detrep:
        raise DimensionError(f"bisz2_bound exige duas variáveis, recebido {p.nvars}")
    r, P_r, grad_r, P_r1, grad_r1, P_r2 = _dados_ordem(p, h)
    razao1 = P_r1 / P_r
    c = (grad_r * (1 - razao1) + grad_r1) / P_r
    return ExpBound(
        p.nvars,
        log_prefactor=math.log(abs(P_r)) - r / 2,
        linear_complex=c,
        quad=(abs(razao1) ** 2 - 2 * (P_r2 / P_r).real + r) / 2,
        norm_kind=TipoNorma.SUP,
        theorem='bisz2'
    )


def msz2_bound(p: MultiPoly, h: Optional[HomogeneousExpansion] = None) -> ExpBound:
    """
    |p(z)| <= ||z||_inf^r |P_r(1)| exp(C0 + C1 ||z||_inf + C2 ||z||_inf^2) com

        C0 = r(log 2 - 1/4) + ||grad P_r(1)||_1 / (sqrt(2) |P_r(1)|)
        C1 = sqrt(2)/|P_r(1)| (||grad P_r(1)||_1 |P_r+1(1)/P_r(1)| + ||grad P_r+1(1)||_1)
        C2 = |P_r+1(1)/P_r(1)|^2 - 2 Re(P_r+2(1)/P_r(1))

    C2 pode ser negativo.
    """
    r, P_r, grad_r, P_r1, grad_r1, P_r2 = _dados_ordem(p, h)
    modulo = abs(P_r)
    norma_r = float(np.abs(grad_r).sum())
    norma_r1 = float(np.abs(grad_r1).sum())
    razao1 = P_r1 / P_r
    C0 = r * (math.log(2) - 0.25) + norma_r / (math.sqrt(2) * modulo)
    C1 = math.sqrt(2) / modulo * (norma_r * abs(razao1) + norma_r1)
    C2 = abs(razao1) ** 2 - 2 * (P_r2 / P_r).real
    if C2 < 0:
        logger.info(f"msz2: C2 = {C2:.6g} negativo, coeficiente quadrático mantido")
    return ExpBound(
        p.nvars,
        lead_degree=r,
        log_prefactor=math.log(modulo) + C0,
        linear_abs=C1,
        quad=C2,
        norm_kind=TipoNorma.SUP,
        theorem='msz2'
    )


# Avaliadores por nome curto, usados pelo harness e pela linha de comandos
AVALIADORES = {
    'original': szasz_original,
    'improved': szasz_improved,
    'vanishing1d': szasz_1d_vanishing,
    'bb': bb_bound,
    'det': det_bound,
    'coeff2': two_var_coeff_bound,
    'coeffn': nvar_coeff_bound,
    'msz': msz_bound,
    'real': real_axis_bound,
    'bisz2': bisz2_bound,
    'msz2': msz2_bound,
}


def compute_bound(nome: str, p: MultiPoly, **opcoes) -> ExpBound:
    """Calcula o certificado de nome `nome` para p"""
    if nome not in AVALIADORES:
        raise HypothesisError(f"Teorema desconhecido: {nome}")
    return AVALIADORES[nome](p, **opcoes)
