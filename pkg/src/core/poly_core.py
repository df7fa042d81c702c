import json
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.utils.utils import (
    TOL_CANONICA,
    TOL_ORDEM,
    DimensionError,
    HypothesisError,
)


Expoente = Tuple[int, ...]


class MultiPoly:
    """
    Polinómio complexo esparso em várias variáveis.

    Attributes:
        nvars (int): Número de variáveis
        terms (Dict[Tuple[int, ...], complex]): Vetor de expoentes -> coeficiente

    A forma é canónica: nenhum coeficiente guardado tem módulo <= zero_tol e
    todos os expoentes têm comprimento nvars. O polinómio nulo tem o dicionário
    de termos vazio (is_zero) e grau total 0 por convenção.
    """

    def __init__(
        self,
        nvars: int,
        terms: Optional[Dict[Sequence[int], complex]] = None,
        zero_tol: float = TOL_CANONICA
    ):
        if nvars < 1:
            raise DimensionError(f"nvars tem de ser positivo, recebido {nvars}")
        self.nvars = nvars
        self.terms: Dict[Expoente, complex] = {}

        for exp, coef in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise DimensionError(
                    f"Expoente {exp} com comprimento diferente de nvars={nvars}"
                )
            if any(e < 0 for e in exp):
                raise DimensionError(f"Expoente negativo em {exp}")
            self.terms[exp] = self.terms.get(exp, 0j) + complex(coef)

        self.terms = {
            exp: coef for exp, coef in sorted(self.terms.items())
            if abs(coef) > zero_tol
        }

    # ------------------------------------------------------------------
    # Construtores
    # ------------------------------------------------------------------

    @classmethod
    def constant(cls, nvars: int, valor: complex = 1.0) -> 'MultiPoly':
        return cls(nvars, {(0,) * nvars: valor})

    @classmethod
    def variable(cls, nvars: int, j: int, coef: complex = 1.0) -> 'MultiPoly':
        """Monómio coef * z_j (índice j a começar em 0)"""
        if not 0 <= j < nvars:
            raise DimensionError(f"Variável {j} fora de [0, {nvars})")
        exp = [0] * nvars
        exp[j] = 1
        return cls(nvars, {tuple(exp): coef})

    @classmethod
    def linear(cls, constante: complex, coefs: Sequence[complex]) -> 'MultiPoly':
        """Forma afim constante + sum_j coefs[j] z_j"""
        nvars = len(coefs)
        termos = {(0,) * nvars: constante}
        for j, c in enumerate(coefs):
            exp = [0] * nvars
            exp[j] = 1
            termos[tuple(exp)] = c
        return cls(nvars, termos)

    @classmethod
    def from_coeffs_1d(cls, coefs: Sequence[complex]) -> 'MultiPoly':
        """Polinómio numa variável a partir de [c_0, c_1, ..., c_d]"""
        return cls(1, {(k,): c for k, c in enumerate(coefs)})

    # ------------------------------------------------------------------
    # Consultas
    # ------------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def total_degree(self) -> int:
        if self.is_zero:
            return 0
        return max(sum(exp) for exp in self.terms)

    def degree_in(self, j: int) -> int:
        """Grau na variável j separadamente"""
        if not 0 <= j < self.nvars:
            raise DimensionError(f"Variável {j} fora de [0, {self.nvars})")
        return max((exp[j] for exp in self.terms), default=0)

    def coefficient(self, exp: Sequence[int]) -> complex:
        return self.terms.get(tuple(exp), 0j)

    @property
    def constant_term(self) -> complex:
        return self.coefficient((0,) * self.nvars)

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def coeffs_1d(self) -> List[complex]:
        """Lista [c_0, ..., c_d] de um polinómio numa variável"""
        if self.nvars != 1:
            raise DimensionError("coeffs_1d exige um polinómio numa variável")
        coefs = [0j] * (self.total_degree + 1)
        for (k,), c in self.terms.items():
            coefs[k] = c
        return coefs

    # ------------------------------------------------------------------
    # Aritmética
    # ------------------------------------------------------------------

    def _verificar_compativel(self, outro: 'MultiPoly'):
        if outro.nvars != self.nvars:
            raise DimensionError(
                f"Polinómios com {self.nvars} e {outro.nvars} variáveis"
            )

    def _como_poly(self, outro) -> 'MultiPoly':
        if isinstance(outro, MultiPoly):
            self._verificar_compativel(outro)
            return outro
        return MultiPoly.constant(self.nvars, complex(outro))

    def __add__(self, outro) -> 'MultiPoly':
        outro = self._como_poly(outro)
        termos = dict(self.terms)
        for exp, coef in outro.terms.items():
            termos[exp] = termos.get(exp, 0j) + coef
        return MultiPoly(self.nvars, termos)

    __radd__ = __add__

    def __neg__(self) -> 'MultiPoly':
        return MultiPoly(self.nvars, {exp: -c for exp, c in self.terms.items()})

    def __sub__(self, outro) -> 'MultiPoly':
        return self + (-self._como_poly(outro))

    def __rsub__(self, outro) -> 'MultiPoly':
        return self._como_poly(outro) - self

    def __mul__(self, outro) -> 'MultiPoly':
        if not isinstance(outro, MultiPoly):
            escalar = complex(outro)
            return MultiPoly(self.nvars, {exp: escalar * c for exp, c in self.terms.items()})
        self._verificar_compativel(outro)
        termos: Dict[Expoente, complex] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in outro.terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                termos[exp] = termos.get(exp, 0j) + c1 * c2
        return MultiPoly(self.nvars, termos)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> 'MultiPoly':
        if k < 0:
            raise ValueError("Só potências não negativas")
        resultado = MultiPoly.constant(self.nvars)
        base = self
        while k:
            if k & 1:
                resultado = resultado * base
            base = base * base
            k >>= 1
        return resultado

    def __eq__(self, outro) -> bool:
        if not isinstance(outro, MultiPoly):
            return NotImplemented
        return self.nvars == outro.nvars and self.terms == outro.terms

    def __call__(self, z: Sequence[complex]) -> complex:
        return evaluate(self, z)

    def almost_equal(self, outro: 'MultiPoly', tol: float = 1e-10) -> bool:
        """Igualdade coeficiente a coeficiente dentro de tol"""
        self._verificar_compativel(outro)
        expoentes = set(self.terms) | set(outro.terms)
        return all(abs(self.coefficient(e) - outro.coefficient(e)) <= tol for e in expoentes)

    # ------------------------------------------------------------------
    # Serialização
    # ------------------------------------------------------------------

    def para_dict(self) -> Dict:
        return {
            'nvars': self.nvars,
            'terms': [
                {'exp': list(exp), 're': c.real, 'im': c.imag}
                for exp, c in sorted(self.terms.items())
            ]
        }

    @classmethod
    def de_dict(cls, dados: Dict) -> 'MultiPoly':
        termos: Dict[Expoente, complex] = {}
        for termo in dados['terms']:
            exp = tuple(int(e) for e in termo['exp'])
            termos[exp] = termos.get(exp, 0j) + complex(
                float(termo.get('re', 0.0)), float(termo.get('im', 0.0))
            )
        return cls(int(dados['nvars']), termos)

    def salvar_json(self, filepath: str):
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(self.para_dict(), f, indent=2)

    @classmethod
    def carregar_json(cls, filepath: str) -> 'MultiPoly':
        with open(filepath, 'r', encoding='utf-8') as f:
            return cls.de_dict(json.load(f))

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        partes = []
        for exp, c in self.terms.items():
            mono = "*".join(
                f"z{k + 1}" if e == 1 else f"z{k + 1}^{e}"
                for k, e in enumerate(exp) if e
            )
            partes.append(f"({c:.6g})" + (f"*{mono}" if mono else ""))
        return " + ".join(partes)

    def __repr__(self) -> str:
        return f"MultiPoly(nvars={self.nvars}, {len(self.terms)} termos, grau={self.total_degree})"


class HomogeneousExpansion:
    """
    Expansão homogénea p = sum_j P_j, com P_j homogéneo de grau j.

    Attributes:
        parts (List[Tuple[int, MultiPoly]]): Pares (grau, P_j) por grau crescente
        vanishing_order (int): Menor grau com parte não nula (ordem de anulamento r)
    """

    def __init__(self, parts: List[Tuple[int, MultiPoly]], vanishing_order: int):
        self.parts = parts
        self.vanishing_order = vanishing_order
        self._por_grau = dict(parts)

    def part(self, j: int) -> Optional[MultiPoly]:
        return self._por_grau.get(j)

    @property
    def nvars(self) -> int:
        return self.parts[0][1].nvars

    def reassemble(self) -> MultiPoly:
        total = MultiPoly(self.nvars)
        for _, parte in self.parts:
            total = total + parte
        return total

    def __repr__(self) -> str:
        return f"HomogeneousExpansion(graus={[g for g, _ in self.parts]}, r={self.vanishing_order})"


# ----------------------------------------------------------------------
# Avaliação
# ----------------------------------------------------------------------

def _verificar_ponto(p: MultiPoly, z: Sequence[complex]):
    if len(z) != p.nvars:
        raise DimensionError(f"Ponto com {len(z)} coordenadas para {p.nvars} variáveis")


def evaluate(p: MultiPoly, z: Sequence[complex]) -> complex:
    """
    Avalia p(z) = sum a(beta) prod z_k^beta_k por acumulação direta.

    A soma percorre os expoentes por ordem lexicográfica, pelo que o
    resultado é reprodutível bit a bit.
    """
    _verificar_ponto(p, z)
    z = [complex(v) for v in z]
    total = 0j
    for exp, coef in p.terms.items():
        termo = coef
        for zk, e in zip(z, exp):
            if e:
                termo *= zk ** e
        total += termo
    return total


def evaluate_many(p: MultiPoly, Z: np.ndarray) -> np.ndarray:
    """
    Avalia p em vários pontos de uma vez.

    Args:
        p: Polinómio
        Z: Matriz (npontos, nvars) de pontos complexos

    Returns:
        np.ndarray: Vetor (npontos,) com os valores
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if Z.shape[1] != p.nvars:
        raise DimensionError(f"Pontos com {Z.shape[1]} coordenadas para {p.nvars} variáveis")
    if p.is_zero:
        return np.zeros(Z.shape[0], dtype=complex)
    expoentes = np.array(list(p.terms.keys()), dtype=int)
    coefs = np.array(list(p.terms.values()), dtype=complex)
    monomios = np.prod(Z[:, None, :] ** expoentes[None, :, :], axis=2)
    return monomios @ coefs


# ----------------------------------------------------------------------
# Derivadas
# ----------------------------------------------------------------------

def partial_derivative(p: MultiPoly, j: int) -> MultiPoly:
    """
    Derivada parcial exata em ordem a z_j (índice a começar em 0).

    Raises:
        DimensionError: Índice fora do intervalo
    """
    if not 0 <= j < p.nvars:
        raise DimensionError(f"Variável {j} fora de [0, {p.nvars})")
    termos = {}
    for exp, coef in p.terms.items():
        if exp[j] == 0:
            continue
        novo = list(exp)
        novo[j] -= 1
        termos[tuple(novo)] = coef * exp[j]
    return MultiPoly(p.nvars, termos)


def _unitario(nvars: int, *indices: int) -> Expoente:
    exp = [0] * nvars
    for k in indices:
        exp[k] += 1
    return tuple(exp)


def gradient_at_zero(p: MultiPoly) -> np.ndarray:
    """Vetor (p_1(0), ..., p_n(0)) = coeficientes a(e_j)"""
    return np.array(
        [p.coefficient(_unitario(p.nvars, j)) for j in range(p.nvars)],
        dtype=complex
    )


def hessian_at_zero(p: MultiPoly) -> np.ndarray:
    """
    Matriz simétrica das segundas derivadas em 0.

    Diagonal: p_jj(0) = 2 a(2e_j). Fora da diagonal: p_jk(0) = a(e_j + e_k).
    """
    n = p.nvars
    H = np.zeros((n, n), dtype=complex)
    for j in range(n):
        H[j, j] = 2 * p.coefficient(_unitario(n, j, j))
        for k in range(j + 1, n):
            H[j, k] = H[k, j] = p.coefficient(_unitario(n, j, k))
    return H


# ----------------------------------------------------------------------
# Expansão homogénea
# ----------------------------------------------------------------------

def homogeneous_parts(p: MultiPoly, zero_tol: float = TOL_ORDEM) -> HomogeneousExpansion:
    """
    Agrupa os termos de p por grau total.

    Todas as partes são guardadas, pelo que reassemble() devolve p. Só a
    ordem de anulamento r ignora as partes cujos coeficientes são todos
    <= zero_tol.

    Raises:
        HypothesisError: Polinómio nulo ou com todos os coeficientes <= zero_tol
    """
    if p.is_zero:
        raise HypothesisError("A expansão homogénea não está definida para o polinómio nulo")

    por_grau: Dict[int, Dict[Expoente, complex]] = {}
    for exp, coef in p.terms.items():
        por_grau.setdefault(sum(exp), {})[exp] = coef

    partes = [(grau, MultiPoly(p.nvars, termos)) for grau, termos in sorted(por_grau.items())]
    significativas = [
        grau for grau, parte in partes if parte.max_abs_coefficient() > zero_tol
    ]
    if not significativas:
        raise HypothesisError(f"Todos os coeficientes estão abaixo de {zero_tol}")
    return HomogeneousExpansion(partes, significativas[0])


def homog_data_at_ones(h: HomogeneousExpansion, j: int) -> Tuple[complex, np.ndarray]:
    """
    Devolve (P_j(1), grad P_j(1)) da parte de grau j.

    P_j(1) = sum_{|beta|=j} a(beta) e (grad P_j(1))_k = sum_{|beta|=j} beta_k a(beta).
    Um grau ausente devolve (0, vetor nulo).
    """
    n = h.nvars
    parte = h.part(j)
    if parte is None:
        return 0j, np.zeros(n, dtype=complex)
    valor = sum(parte.terms.values(), 0j)
    gradiente = np.zeros(n, dtype=complex)
    for exp, coef in parte.terms.items():
        gradiente += np.array(exp, dtype=float) * coef
    return valor, gradiente


# ----------------------------------------------------------------------
# Substituições
# ----------------------------------------------------------------------

def _potencia_binomial(nvars: int, a: complex, ia: int, b: complex, ib: int, e: int) -> MultiPoly:
    """(a*w_ia + b*w_ib)^e expandido pelo binómio de Newton"""
    termos: Dict[Expoente, complex] = {}
    for k in range(e + 1):
        exp = [0] * nvars
        exp[ia] += k
        exp[ib] += e - k
        exp = tuple(exp)
        termos[exp] = termos.get(exp, 0j) + math.comb(e, k) * a ** k * b ** (e - k)
    return MultiPoly(nvars, termos)


def restrict_to_plane(p: MultiPoly, u: Sequence[complex], v: Sequence[complex]) -> MultiPoly:
    """
    Restrição q(w1, w2) = p(w1*u + w2*v) por expansão multinomial exata.

    Raises:
        DimensionError: u ou v com comprimento diferente de p.nvars
    """
    if len(u) != p.nvars or len(v) != p.nvars:
        raise DimensionError(
            f"Direções com comprimentos {len(u)}, {len(v)} para {p.nvars} variáveis"
        )
    cache: Dict[Tuple[int, int], MultiPoly] = {}

    def potencia(k: int, e: int) -> MultiPoly:
        if (k, e) not in cache:
            cache[(k, e)] = _potencia_binomial(2, complex(u[k]), 0, complex(v[k]), 1, e)
        return cache[(k, e)]

    resultado = MultiPoly(2)
    for exp, coef in p.terms.items():
        termo = MultiPoly.constant(2, coef)
        for k, e in enumerate(exp):
            if e:
                termo = termo * potencia(k, e)
        resultado = resultado + termo
    return resultado


def bidegree(p: MultiPoly) -> Tuple[int, int]:
    """Bigrau (n, m) de um polinómio em duas variáveis"""
    if p.nvars != 2:
        raise DimensionError("O bigrau só está definido para duas variáveis")
    return p.degree_in(0), p.degree_in(1)


def _resolver_bigrau(p: MultiPoly, n: Optional[int], m: Optional[int]) -> Tuple[int, int]:
    n_real, m_real = bidegree(p)
    n = n_real if n is None else n
    m = m_real if m is None else m
    if n < n_real or m < m_real:
        raise HypothesisError(
            f"Bigrau declarado ({n}, {m}) abaixo do bigrau real ({n_real}, {m_real})"
        )
    return n, m


def _fator_afim_1d(nvars: int, j: int, constante: complex, coef: complex, e: int) -> MultiPoly:
    """(constante + coef*w_j)^e"""
    termos = {}
    for k in range(e + 1):
        exp = [0] * nvars
        exp[j] = k
        termos[tuple(exp)] = math.comb(e, k) * constante ** (e - k) * coef ** k
    return MultiPoly(nvars, termos)


def cayley_substitute(p: MultiPoly, n: Optional[int] = None, m: Optional[int] = None) -> MultiPoly:
    """
    Passa de um polinómio estável no semiplano superior para o bidisco:

        q(w1, w2) = p(phi(w1), phi(w2)) ((1 - w1)/(2i))^n ((1 - w2)/(2i))^m

    com phi(zeta) = i(1 + zeta)/(1 - zeta). Cada monómio z1^a z2^b contribui
    i^(a+b) (1+w1)^a (1-w1)^(n-a) (1+w2)^b (1-w2)^(m-b) / (2i)^(n+m).

    Args:
        p: Polinómio em duas variáveis
        n: Grau em z1 (calculado a partir de p se omitido)
        m: Grau em z2 (calculado a partir de p se omitido)

    Raises:
        HypothesisError: n ou m abaixo do grau real nessa variável
    """
    n, m = _resolver_bigrau(p, n, m)
    escala = 1 / (2j) ** (n + m)
    resultado = MultiPoly(2)
    for (a, b), coef in p.terms.items():
        termo = MultiPoly.constant(2, coef * 1j ** (a + b) * escala)
        termo = termo * _fator_afim_1d(2, 0, 1, 1, a) * _fator_afim_1d(2, 0, 1, -1, n - a)
        termo = termo * _fator_afim_1d(2, 1, 1, 1, b) * _fator_afim_1d(2, 1, 1, -1, m - b)
        resultado = resultado + termo
    return resultado


def cayley_inverse_substitute(q: MultiPoly, n: Optional[int] = None, m: Optional[int] = None) -> MultiPoly:
    """
    Transformação inversa: p(z) = q(phi^-1(z1), phi^-1(z2)) (z1 + i)^n (z2 + i)^m,
    com phi^-1(zeta) = (zeta - i)/(zeta + i).
    """
    n, m = _resolver_bigrau(q, n, m)
    resultado = MultiPoly(2)
    for (a, b), coef in q.terms.items():
        termo = MultiPoly.constant(2, coef)
        termo = termo * _fator_afim_1d(2, 0, -1j, 1, a) * _fator_afim_1d(2, 0, 1j, 1, n - a)
        termo = termo * _fator_afim_1d(2, 1, -1j, 1, b) * _fator_afim_1d(2, 1, 1j, 1, m - b)
        resultado = resultado + termo
    return resultado


def product(fatores: Iterable[MultiPoly], nvars: int) -> MultiPoly:
    resultado = MultiPoly.constant(nvars)
    for fator in fatores:
        resultado = resultado * fator
    return resultado
