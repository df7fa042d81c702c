import json
import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.core.poly_core import MultiPoly, evaluate_many
from src.utils.utils import (
    TOL_MATRIZ,
    DimensionError,
    HypothesisError,
    NumericalError,
    imag_part,
    matrix_from_dict,
    matrix_to_dict,
    min_eig_hermitian,
    modified_gram_schmidt,
    pair_to_complex,
    complex_to_pair,
)

logger = logging.getLogger(__name__)

# Limites da expansão por interpolação
MAX_TAMANHO_INTERPOLACAO = 10
MAX_VARIAVEIS_INTERPOLACAO = 3


class DetRep:
    """
    Representação determinantal no semiplano: p(z) = c det(A + sum_j z_j B_j).

    Attributes:
        c (complex): Constante
        A (np.ndarray): Matriz d x d com Im A >= 0
        B (List[np.ndarray]): n matrizes d x d semidefinidas positivas com soma I
    """

    def __init__(self, c: complex, A: np.ndarray, B: Sequence[np.ndarray]):
        self.c = complex(c)
        self.A = np.atleast_2d(np.asarray(A, dtype=complex))
        self.B = [np.atleast_2d(np.asarray(Bj, dtype=complex)) for Bj in B]
        d = self.A.shape[0]
        if self.A.shape != (d, d):
            raise DimensionError(f"A tem de ser quadrada, recebido {self.A.shape}")
        if not self.B:
            raise DimensionError("É necessária pelo menos uma matriz B_j")
        for j, Bj in enumerate(self.B):
            if Bj.shape != (d, d):
                raise DimensionError(f"B_{j} com forma {Bj.shape}, esperado {(d, d)}")

    @property
    def size(self) -> int:
        return self.A.shape[0]

    @property
    def nvars(self) -> int:
        return len(self.B)

    def para_dict(self) -> Dict:
        return {
            'c': complex_to_pair(self.c),
            'A': matrix_to_dict(self.A),
            'B': [matrix_to_dict(Bj) for Bj in self.B]
        }

    @classmethod
    def de_dict(cls, dados: Dict) -> 'DetRep':
        return cls(
            pair_to_complex(dados['c']),
            matrix_from_dict(dados['A']),
            [matrix_from_dict(Bj) for Bj in dados['B']]
        )

    def salvar_json(self, filepath: str):
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(self.para_dict(), f, indent=2)

    @classmethod
    def carregar_json(cls, filepath: str) -> 'DetRep':
        with open(filepath, 'r', encoding='utf-8') as f:
            return cls.de_dict(json.load(f))

    def __repr__(self) -> str:
        return f"DetRep(d={self.size}, n={self.nvars}, c={self.c:.6g})"


class BidiskRep:
    """
    Representação no bidisco: q(w) = c det(I - D Delta(w)),
    Delta(w) = w1 P1 + w2 P2 com P1 = diag(I_n, 0), P2 = diag(0, I_m).

    Attributes:
        c (complex): Constante
        D (np.ndarray): Contração (n+m) x (n+m)
        n (int): Grau em w1
        m (int): Grau em w2
    """

    def __init__(self, c: complex, D: np.ndarray, n: int, m: int):
        self.c = complex(c)
        self.D = np.atleast_2d(np.asarray(D, dtype=complex))
        self.n = int(n)
        self.m = int(m)
        if self.D.shape != (self.n + self.m, self.n + self.m):
            raise DimensionError(
                f"D com forma {self.D.shape} para bigrau ({self.n}, {self.m})"
            )

    def projections(self) -> Tuple[np.ndarray, np.ndarray]:
        d = self.n + self.m
        P1 = np.zeros((d, d), dtype=complex)
        P1[:self.n, :self.n] = np.eye(self.n)
        return P1, np.eye(d) - P1

    def is_contraction(self, tol: float = TOL_MATRIZ) -> bool:
        return float(np.linalg.norm(self.D, 2)) <= 1 + tol

    def para_dict(self) -> Dict:
        return {
            'c': complex_to_pair(self.c),
            'D': matrix_to_dict(self.D),
            'n': self.n,
            'm': self.m
        }

    @classmethod
    def de_dict(cls, dados: Dict) -> 'BidiskRep':
        return cls(
            pair_to_complex(dados['c']),
            matrix_from_dict(dados['D']),
            int(dados['n']),
            int(dados['m'])
        )

    def salvar_json(self, filepath: str):
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(self.para_dict(), f, indent=2)

    @classmethod
    def carregar_json(cls, filepath: str) -> 'BidiskRep':
        with open(filepath, 'r', encoding='utf-8') as f:
            return cls.de_dict(json.load(f))

    def __repr__(self) -> str:
        return f"BidiskRep(n={self.n}, m={self.m}, c={self.c:.6g})"


class DetRepCheck:
    """
    Folgas medidas dos invariantes de uma representação determinantal.

    Attributes:
        min_eig_im_a (float): Menor valor próprio de Im A
        min_eig_b (List[float]): Menor valor próprio de cada B_j
        b_hermitian_error (float): max_j ||B_j - B_j*||
        sum_b_error (float): ||sum B_j - I||
        eps (float): Tolerância usada
    """

    def __init__(self, min_eig_im_a: float, min_eig_b: List[float],
                 b_hermitian_error: float, sum_b_error: float, eps: float):
        self.min_eig_im_a = min_eig_im_a
        self.min_eig_b = min_eig_b
        self.b_hermitian_error = b_hermitian_error
        self.sum_b_error = sum_b_error
        self.eps = eps

    @property
    def passed(self) -> bool:
        return (
            self.min_eig_im_a >= -self.eps
            and all(v >= -self.eps for v in self.min_eig_b)
            and self.b_hermitian_error <= self.eps
            and self.sum_b_error <= self.eps
        )

    def obter_resumo(self) -> Dict:
        return {
            'passou': self.passed,
            'min_eig_im_a': self.min_eig_im_a,
            'min_eig_b': list(self.min_eig_b),
            'erro_hermitico_b': self.b_hermitian_error,
            'erro_soma_b': self.sum_b_error,
            'eps': self.eps
        }

    def __str__(self) -> str:
        estado = "OK" if self.passed else "FALHOU"
        return (
            f"DetRepCheck[{estado}]: min eig Im A={self.min_eig_im_a:.3e}, "
            f"min eig B={min(self.min_eig_b):.3e}, ||sum B - I||={self.sum_b_error:.3e}"
        )


# ----------------------------------------------------------------------
# Avaliação e verificação
# ----------------------------------------------------------------------

def _matrizes_em(rep: DetRep, Z: np.ndarray) -> np.ndarray:
    """Pilha (npontos, d, d) das matrizes A + sum_j z_j B_j"""
    Bs = np.stack(rep.B)
    return rep.A[None, :, :] + np.einsum('pj,jab->pab', Z, Bs)


def eval_detrep(rep: DetRep, z: Sequence[complex]) -> complex:
    """
    c det(A + sum_j z_j B_j). O determinante vem da factorização LU com
    pivotagem parcial do LAPACK (numpy.linalg.det).
    """
    if len(z) != rep.nvars:
        raise DimensionError(f"Ponto com {len(z)} coordenadas para {rep.nvars} variáveis")
    Z = np.asarray(z, dtype=complex)[None, :]
    return complex(rep.c * np.linalg.det(_matrizes_em(rep, Z))[0])


def eval_detrep_many(rep: DetRep, Z: np.ndarray) -> np.ndarray:
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if Z.shape[1] != rep.nvars:
        raise DimensionError(f"Pontos com {Z.shape[1]} coordenadas para {rep.nvars} variáveis")
    return rep.c * np.linalg.det(_matrizes_em(rep, Z))


def check_detrep(rep: DetRep, eps: float = TOL_MATRIZ) -> DetRepCheck:
    """
    Mede as folgas dos invariantes: Im A >= 0, B_j >= 0 hermíticas e sum B_j = I.
    """
    d = rep.size
    soma = sum(rep.B, np.zeros((d, d), dtype=complex))
    return DetRepCheck(
        min_eig_im_a=min_eig_hermitian(imag_part(rep.A)),
        min_eig_b=[min_eig_hermitian(Bj) for Bj in rep.B],
        b_hermitian_error=max(float(np.linalg.norm(Bj - Bj.conj().T, 2)) for Bj in rep.B),
        sum_b_error=float(np.linalg.norm(soma - np.eye(d), 2)),
        eps=eps
    )


# ----------------------------------------------------------------------
# Bidisco -> semiplano
# ----------------------------------------------------------------------

def fixed_space_split(D: np.ndarray, tol: float = TOL_MATRIZ) -> Tuple[np.ndarray, np.ndarray]:
    """
    Separa o espaço fixo (valor próprio 1) de uma contração D.

    Para uma contração o espaço fixo coincide com o núcleo de I - D e é
    redutor. Os vetores singulares à direita de I - D com valor singular
    <= tol*||I - D|| formam as primeiras s colunas de U; os restantes
    completam a base e são reortonormalizados por Gram-Schmidt modificado.

    Args:
        D: Contração d x d
        tol: Tolerância relativa

    Returns:
        Tuple: (U unitária, K) com U* D U = diag(I_s, K)

    Raises:
        HypothesisError: D não é uma contração
        NumericalError: Blocos fora da diagonal acima de 10*tol
    """
    D = np.atleast_2d(np.asarray(D, dtype=complex))
    d = D.shape[0]
    if float(np.linalg.norm(D, 2)) > 1 + tol:
        raise HypothesisError(f"D não é uma contração (||D|| = {np.linalg.norm(D, 2):.6g})")

    M = np.eye(d) - D
    _, sigma, Vh = np.linalg.svd(M)
    norma = float(sigma[0]) if d else 0.0
    if norma == 0.0:
        return np.eye(d, dtype=complex), np.zeros((0, 0), dtype=complex)

    nulo = sigma <= tol * norma
    s = int(np.count_nonzero(nulo))
    if s == 0:
        U = np.eye(d, dtype=complex)
    else:
        V = Vh.conj().T
        U = modified_gram_schmidt(np.hstack([V[:, nulo], V[:, ~nulo]]))

    T = U.conj().T @ D @ U
    fora = max(
        float(np.linalg.norm(T[:s, s:])) if s and s < d else 0.0,
        float(np.linalg.norm(T[s:, :s])) if s and s < d else 0.0
    )
    if fora > 10 * tol:
        raise NumericalError(
            f"Separação quase defeituosa: blocos fora da diagonal com norma {fora:.3e}"
        )
    return U, T[s:, s:]


def bidisk_eval(brep: BidiskRep, w: Sequence[complex]) -> complex:
    """q(w) = c det(I - D Delta(w))"""
    P1, P2 = brep.projections()
    Delta = w[0] * P1 + w[1] * P2
    return complex(brep.c * np.linalg.det(np.eye(brep.D.shape[0]) - brep.D @ Delta))


def bidisk_to_halfplane_eval(brep: BidiskRep, z: Sequence[complex]) -> complex:
    """Lado direito da identidade de ida e volta: q(phi^-1(z1), phi^-1(z2)) (z1+i)^n (z2+i)^m"""
    z1, z2 = complex(z[0]), complex(z[1])
    w = ((z1 - 1j) / (z1 + 1j), (z2 - 1j) / (z2 + 1j))
    return bidisk_eval(brep, w) * (z1 + 1j) ** brep.n * (z2 + 1j) ** brep.m


def imag_identity_residual(K: np.ndarray, A: np.ndarray) -> float:
    """||Im A - (I-K)^-1 (I-KK*) (I-K*)^-1||"""
    k = K.shape[0]
    I = np.eye(k)
    inv = np.linalg.inv(I - K)
    esperado = inv @ (I - K @ K.conj().T) @ inv.conj().T
    return float(np.linalg.norm(imag_part(A) - esperado, 2))


def bidisk_to_halfplane(
    brep: BidiskRep,
    tol: float = TOL_MATRIZ,
    verificar_grau: bool = False
) -> DetRep:
    """
    Converte uma representação no bidisco numa representação no semiplano.

    Passos: separa o espaço fixo de D (U* D U = diag(I_s, K)), forma
    A = i(I+K)(I-K)^-1, toma B_j como o bloco inferior direito k x k de
    U* P_j U e acumula c0 = c det(I-K) det(2i I_s), de modo que
    p(z) = q(phi^-1(z1), phi^-1(z2)) (z1+i)^n (z2+i)^m = c0 det(A + sum z_j B_j).

    Args:
        brep: Representação no bidisco
        tol: Tolerância das decisões de posto e dos invariantes
        verificar_grau: Expande o resultado e avisa se o bigrau não coincide com (n, m)

    Returns:
        DetRep: Representação k x k que passa check_detrep

    Raises:
        HypothesisError: D não é contração, ou K vazio (polinómio constante)
        NumericalError: I - K numericamente singular, ou invariantes falhados
    """
    U, K = fixed_space_split(brep.D, tol)
    d = brep.D.shape[0]
    k = K.shape[0]
    s = d - k
    if k == 0:
        raise HypothesisError("D = I: o polinómio representado é constante")

    I = np.eye(k)
    sigma_min = float(np.linalg.svd(I - K, compute_uv=False)[-1])
    if sigma_min <= tol:
        raise NumericalError(
            f"I - K numericamente singular (menor valor singular {sigma_min:.3e})"
        )

    # A = i(I+K)(I-K)^-1, resolvido como sistema transposto
    A = 1j * np.linalg.solve((I - K).T, (I + K).T).T
    B = [
        (U.conj().T @ P @ U)[s:, s:]
        for P in brep.projections()
    ]
    B = [(Bj + Bj.conj().T) / 2 for Bj in B]
    c0 = brep.c * np.linalg.det(I - K) * (2j) ** s

    rep = DetRep(c0, A, B)
    relatorio = check_detrep(rep, tol)
    if not relatorio.passed:
        raise NumericalError(f"Representação convertida falhou os invariantes: {relatorio}")

    residuo = imag_identity_residual(K, A)
    if residuo > 10 * tol * max(1.0, float(np.linalg.norm(A, 2))):
        logger.warning(f"Identidade de Im A com resíduo {residuo:.3e}")

    if verificar_grau:
        p = detrep_to_poly(rep)
        if (p.degree_in(0), p.degree_in(1)) != (brep.n, brep.m):
            logger.warning(
                f"Bigrau de p ({p.degree_in(0)}, {p.degree_in(1)}) difere do "
                f"declarado ({brep.n}, {brep.m})"
            )
        if p.total_degree != k:
            logger.warning(f"Grau total {p.total_degree} difere do tamanho k={k}")
    return rep


def random_contraction(d: int, norma: float, rng_seed: int) -> np.ndarray:
    """Contração aleatória d x d com norma de operador igual a `norma`"""
    rng = np.random.default_rng(rng_seed)
    M = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return norma * M / np.linalg.norm(M, 2)


# ----------------------------------------------------------------------
# Núcleo de A com Im A >= 0
# ----------------------------------------------------------------------

def kernel_split_psd_imag(A: np.ndarray, tol: float = TOL_MATRIZ) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Separa o núcleo de A quando Im A >= 0: U* A U = diag(0_s, C).

    Com Im A >= 0 o bloco superior direito de U* A U anula-se e C é invertível
    com Im C >= 0.

    Returns:
        Tuple: (U unitária, C, s = dim ker A)

    Raises:
        HypothesisError: Im A não é semidefinida positiva
        NumericalError: Bloco superior direito demasiado grande
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    d = A.shape[0]
    if min_eig_hermitian(imag_part(A)) < -tol:
        raise HypothesisError("Im A não é semidefinida positiva")

    _, sigma, Vh = np.linalg.svd(A)
    norma = float(sigma[0]) if d else 0.0
    if norma == 0.0:
        return np.eye(d, dtype=complex), np.zeros((0, 0), dtype=complex), d

    nulo = sigma <= tol * norma
    s = int(np.count_nonzero(nulo))
    if s == 0:
        return np.eye(d, dtype=complex), A.copy(), 0

    V = Vh.conj().T
    U = modified_gram_schmidt(np.hstack([V[:, nulo], V[:, ~nulo]]))
    T = U.conj().T @ A @ U
    residuo = float(np.linalg.norm(T[:s, s:]))
    escala = max(1.0, norma)
    if residuo > 10 * tol * escala:
        raise NumericalError(f"Bloco superior direito com norma {residuo:.3e}: Im A não é PSD")
    C = T[s:, s:]
    if min_eig_hermitian(imag_part(C)) < -10 * tol * escala:
        raise NumericalError("Im C deixou de ser semidefinida positiva")
    return U, C, s


# ----------------------------------------------------------------------
# Expansão em polinómio
# ----------------------------------------------------------------------

def _nos_chebyshev(k: int) -> np.ndarray:
    return np.cos((2 * np.arange(k) + 1) * np.pi / (2 * k))


def detrep_to_poly(rep: DetRep, limpeza: float = 1e-11) -> MultiPoly:
    """
    Recupera os coeficientes de p(z) = c det(A + sum z_j B_j) por interpolação.

    Avalia numa grelha tensorial de d+1 nós de Chebyshev por variável e
    resolve o sistema de Vandermonde tensorial eixo a eixo. Coeficientes com
    módulo <= limpeza*max|coef| e monómios de grau total > d são descartados.

    Raises:
        DimensionError: d > 10 ou n > 3
    """
    d, n = rep.size, rep.nvars
    if d > MAX_TAMANHO_INTERPOLACAO or n > MAX_VARIAVEIS_INTERPOLACAO:
        raise DimensionError(
            f"Expansão limitada a d <= {MAX_TAMANHO_INTERPOLACAO} e n <= "
            f"{MAX_VARIAVEIS_INTERPOLACAO}, recebido d={d}, n={n}"
        )

    nos = _nos_chebyshev(d + 1)
    grelha = np.stack(np.meshgrid(*([nos] * n), indexing='ij'), axis=-1).reshape(-1, n)
    valores = eval_detrep_many(rep, grelha).reshape((d + 1,) * n)

    V_inv = np.linalg.inv(np.vander(nos, d + 1, increasing=True))
    coefs = valores
    for eixo in range(n):
        coefs = np.moveaxis(np.tensordot(V_inv, coefs, axes=([1], [eixo])), 0, eixo)

    maximo = float(np.abs(coefs).max())
    termos = {}
    for exp in np.ndindex(*coefs.shape):
        if sum(exp) <= d and abs(coefs[exp]) > limpeza * maximo:
            termos[exp] = complex(coefs[exp])
    p = MultiPoly(n, termos)

    rng = np.random.default_rng(0)
    Z = rng.uniform(-1, 1, (20, n)) + 1j * rng.uniform(-1, 1, (20, n))
    direto = eval_detrep_many(rep, Z)
    erro = float(np.abs(evaluate_many(p, Z) - direto).max() / max(1e-300, np.abs(direto).max()))
    if erro > 1e-8:
        logger.warning(f"Expansão determinantal com resíduo relativo {erro:.3e}")
    return p


# ----------------------------------------------------------------------
# Identidades do traço e lemas matriciais
# ----------------------------------------------------------------------

def trace_identities(rep: DetRep, tol: float = TOL_MATRIZ) -> Tuple[np.ndarray, np.ndarray]:
    """
    Derivadas em 0 a partir de X_j = B_j A^-1:

        p_j(0) = tr X_j,   p_jk(0) = -tr(X_j X_k) + tr X_j tr X_k

    Returns:
        Tuple: (vetor dos tr X_j, matriz das segundas derivadas)

    Raises:
        HypothesisError: A singular (p(0) = 0) ou c det A != 1
    """
    det_A = np.linalg.det(rep.A)
    if abs(det_A) <= tol:
        raise HypothesisError("A é singular (p(0) = 0); use a via da ordem de anulamento")
    if abs(rep.c * det_A - 1) > tol:
        raise HypothesisError(f"p(0) = c det A = {rep.c * det_A:.6g} em vez de 1")

    A_inv = np.linalg.inv(rep.A)
    X = [Bj @ A_inv for Bj in rep.B]
    tracos = np.array([np.trace(Xj) for Xj in X], dtype=complex)
    n = rep.nvars
    H = np.empty((n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            H[j, k] = -np.trace(X[j] @ X[k]) + tracos[j] * tracos[k]
    return tracos, H


def trace_pm_sides(M: np.ndarray, P: np.ndarray) -> Tuple[float, float]:
    """(|tr(MP)|, ||M|| tr P) para P >= 0"""
    return abs(np.trace(M @ P)), float(np.linalg.norm(M, 2)) * float(np.trace(P).real)


def sum_b_sides(B: Sequence[np.ndarray], z: Sequence[complex]) -> Tuple[float, float]:
    """(||sum z_j B_j||, ||z||_inf) para B_j >= 0 com soma I"""
    soma = sum(complex(zj) * Bj for zj, Bj in zip(z, B))
    return float(np.linalg.norm(soma, 2)), float(np.max(np.abs(z)))


def im_trace_sides(M: np.ndarray) -> Tuple[float, float]:
    """(tr M*M, |tr M|^2 - Re((tr M)^2 - tr M^2)) para Im M >= 0"""
    t = np.trace(M)
    esquerdo = float(np.trace(M.conj().T @ M).real)
    direito = abs(t) ** 2 - (t ** 2 - np.trace(M @ M)).real
    return esquerdo, float(direito)
