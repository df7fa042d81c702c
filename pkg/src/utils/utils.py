import math
from typing import Dict, List, Sequence, Tuple

import numpy as np


# Tolerâncias por omissão partilhadas pelos módulos
TOL_CANONICA = 1e-12
TOL_ORDEM = 1e-9
TOL_MATRIZ = 1e-8
TOL_JACOBI = 1e-10
MAX_VARRIMENTOS_JACOBI = 100


class DimensionError(ValueError):
    """Dimensões ou índices incompatíveis, ou limites de tamanho excedidos"""


class HypothesisError(ValueError):
    """Uma hipótese (pré-condição) de um teorema ou operação não se verifica"""


class NumericalError(ArithmeticError):
    """Uma decisão numérica não pôde ser tomada com segurança"""


def format_float(x: float) -> str:
    """Formata um real com 17 algarismos significativos (relatórios comparáveis com diff)"""
    return f"{x:.17g}"


def complex_to_pair(z: complex) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(par: Sequence[float]) -> complex:
    if len(par) != 2:
        raise DimensionError(f"Par [re, im] inválido: {par}")
    return complex(float(par[0]), float(par[1]))


def matrix_to_dict(M: np.ndarray) -> Dict:
    """
    Converte uma matriz complexa para o formato de ficheiro
    {"rows": r, "cols": c, "data": [[re, im], ...]} (ordem por linhas).
    """
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    linhas, colunas = M.shape
    return {
        'rows': int(linhas),
        'cols': int(colunas),
        'data': [complex_to_pair(v) for v in M.reshape(-1)]
    }


def matrix_from_dict(dados: Dict) -> np.ndarray:
    linhas = int(dados['rows'])
    colunas = int(dados['cols'])
    valores = [pair_to_complex(par) for par in dados['data']]
    if len(valores) != linhas * colunas:
        raise DimensionError(
            f"Matriz {linhas}x{colunas} com {len(valores)} entradas"
        )
    return np.array(valores, dtype=complex).reshape(linhas, colunas)


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return (M + M.conj().T) / 2


def imag_part(M: np.ndarray) -> np.ndarray:
    """Im M = (M - M*)/(2i), sempre hermítica"""
    return (M - M.conj().T) / 2j


def min_eig_hermitian(H: np.ndarray) -> float:
    """
    Menor valor próprio de uma matriz hermítica.

    A matriz é simetrizada com (H + H*)/2 antes do eigvalsh para eliminar
    a assimetria de arredondamento. Matriz vazia devolve +inf.
    """
    H = np.asarray(H, dtype=complex)
    if H.size == 0:
        return math.inf
    return float(np.linalg.eigvalsh(hermitian_part(H))[0])


def random_complex_matrix(rng: np.random.Generator, linhas: int, colunas: int) -> np.ndarray:
    return rng.standard_normal((linhas, colunas)) + 1j * rng.standard_normal((linhas, colunas))


def random_psd(rng: np.random.Generator, d: int, posto: int = None) -> np.ndarray:
    """Matriz semidefinida positiva W W* com W de d x posto"""
    posto = d if posto is None else posto
    W = random_complex_matrix(rng, d, posto)
    return W @ W.conj().T


def jacobi_eigenvalues(
    S: np.ndarray,
    eps: float = TOL_JACOBI,
    max_varrimentos: int = MAX_VARRIMENTOS_JACOBI
) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Valores e vetores próprios de uma matriz real simétrica pelo método
    cíclico de rotações de Jacobi.

    Args:
        S: Matriz real simétrica n x n
        eps: Limiar da norma fora da diagonal (relativo à norma de S)
        max_varrimentos: Número máximo de varrimentos completos

    Returns:
        Tuple: (valores próprios, matriz de vetores próprios, varrimentos usados)

    Raises:
        DimensionError: Matriz não quadrada
        HypothesisError: Matriz não simétrica
    """
    A = np.array(S, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"A matriz tem de ser quadrada, recebido {A.shape}")
    n = A.shape[0]
    escala = max(1.0, float(np.abs(A).max())) if n else 1.0
    if n and np.abs(A - A.T).max() > 1e-12 * escala:
        raise HypothesisError("A matriz tem de ser simétrica")

    V = np.eye(n)
    varrimentos = 0
    limiar = eps * max(1.0, float(np.linalg.norm(A))) if n else eps

    while varrimentos < max_varrimentos:
        fora_diagonal = math.sqrt(float(np.sum(np.triu(A, 1) ** 2)))
        if fora_diagonal <= limiar:
            break
        varrimentos += 1
        for p in range(n):
            for q in range(p + 1, n):
                if abs(A[p, q]) <= limiar / n:
                    continue
                phi = 0.5 * math.atan2(2 * A[p, q], A[q, q] - A[p, p])
                c, s = math.cos(phi), math.sin(phi)

                # A <- G^T A G com a rotação G no plano (p, q)
                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                lin_p, lin_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * lin_p - s * lin_q
                A[q, :] = s * lin_p + c * lin_q
                A[p, q] = A[q, p] = 0.0

                col_p, col_q = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * col_p - s * col_q
                V[:, q] = s * col_p + c * col_q

    return np.diag(A).copy(), V, varrimentos


def operator_norm_symmetric(S: np.ndarray) -> float:
    """Norma de operador de uma matriz real simétrica: maior |valor próprio|"""
    S = np.asarray(S, dtype=float)
    if S.size == 0:
        return 0.0
    valores, _, _ = jacobi_eigenvalues(S)
    return float(np.abs(valores).max())


def modified_gram_schmidt(colunas: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """
    Ortonormaliza as colunas de uma matriz pelo Gram-Schmidt modificado.

    Faz duas passagens (reortogonalização), o que leva a ortogonalidade ao
    nível do arredondamento mesmo com colunas quase dependentes.

    Raises:
        NumericalError: Uma coluna fica com norma abaixo de tol
    """
    Q = np.array(colunas, dtype=complex)
    k = Q.shape[1]
    for i in range(k):
        for _ in range(2):
            for j in range(i):
                Q[:, i] -= np.vdot(Q[:, j], Q[:, i]) * Q[:, j]
        norma = np.linalg.norm(Q[:, i])
        if norma <= tol:
            raise NumericalError(f"Coluna {i} linearmente dependente das anteriores")
        Q[:, i] /= norma
    return Q


def inverse_sqrt_psd(S: np.ndarray) -> np.ndarray:
    """S^(-1/2) de uma matriz hermítica definida positiva, via eigh"""
    valores, vetores = np.linalg.eigh(hermitian_part(np.asarray(S, dtype=complex)))
    if valores[0] <= 0:
        raise NumericalError(f"Matriz não é definida positiva (menor valor próprio {valores[0]:.3e})")
    return (vetores / np.sqrt(valores)[None, :]) @ vetores.conj().T


def normalize_to_identity(G: Sequence[np.ndarray]) -> List[np.ndarray]:
    """B_j = S^-1/2 G_j S^-1/2 com S = sum G_j, pelo que sum B_j = I"""
    S_inv = inverse_sqrt_psd(sum(G))
    return [hermitian_part(S_inv @ Gj @ S_inv) for Gj in G]
