import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.core.poly_core import (
    MultiPoly,
    bidegree,
    cayley_inverse_substitute,
    cayley_substitute,
    evaluate,
    evaluate_many,
    gradient_at_zero,
    hessian_at_zero,
    homog_data_at_ones,
    homogeneous_parts,
    partial_derivative,
    product,
    restrict_to_plane,
)
from src.utils.utils import DimensionError, HypothesisError


def _aleatorio(rng, nvars, grau, termos=8):
    coefs = {}
    for _ in range(termos):
        exp = [0] * nvars
        for _ in range(int(rng.integers(0, grau + 1))):
            exp[int(rng.integers(0, nvars))] += 1
        coefs[tuple(exp)] = complex(rng.standard_normal(), rng.standard_normal())
    return MultiPoly(nvars, coefs)


# ----------------------------------------------------------------------
# Forma canónica e aritmética
# ----------------------------------------------------------------------

def test_forma_canonica_descarta_coeficientes_pequenos():
    p = MultiPoly(2, {(0, 0): 1, (1, 0): 1e-13})
    assert list(p.terms) == [(0, 0)]


def test_soma_com_simetrico_e_nula(produto_bidisco):
    zero = produto_bidisco + (-produto_bidisco)
    assert zero.is_zero
    assert zero.terms == {}
    assert zero.total_degree == 0


def test_expoente_com_comprimento_errado():
    with pytest.raises(DimensionError):
        MultiPoly(2, {(1,): 1})


def test_produto_de_fatores_lineares(produto_bidisco):
    p = MultiPoly.linear(1, [1, 0]) * MultiPoly.linear(1, [0, 1])
    assert p == produto_bidisco
    assert p.total_degree == 2


def test_potencia():
    p = MultiPoly.from_coeffs_1d([1, 1]) ** 3
    assert p.coeffs_1d() == [1, 3, 3, 1]


def test_produto_de_lista_vazia_e_um():
    assert product([], 3) == MultiPoly.constant(3)


def test_serializacao_json(tmp_path, produto_bidisco):
    caminho = tmp_path / "p.json"
    produto_bidisco.salvar_json(str(caminho))
    dados = json.loads(caminho.read_text(encoding="utf-8"))
    assert dados["nvars"] == 2
    assert dados["terms"][0] == {"exp": [0, 0], "re": 1.0, "im": 0.0}
    assert MultiPoly.carregar_json(str(caminho)) == produto_bidisco


def test_leitura_aceita_termos_fora_de_ordem():
    dados = {"nvars": 1, "terms": [{"exp": [2], "re": 1.0, "im": 0.0},
                                   {"exp": [0], "re": 0.0, "im": 2.0}]}
    p = MultiPoly.de_dict(dados)
    assert list(p.terms) == [(0,), (2,)]
    assert p.coefficient((0,)) == 2j


# ----------------------------------------------------------------------
# Avaliação
# ----------------------------------------------------------------------

def test_avaliar_constante():
    assert evaluate(MultiPoly.constant(2), [7 + 3j, -2]) == 1


def test_avaliar_linear():
    p = MultiPoly.linear(1, [1, 1])
    assert evaluate(p, [1j, 1j]) == 1 + 2j


def test_avaliar_quadrado():
    p = MultiPoly.from_coeffs_1d([1, 2, 1])
    assert evaluate(p, [1j]) == pytest.approx(2j)
    assert abs(evaluate(p, [1j])) == pytest.approx(2.0)


def test_avaliar_dimensao_errada(produto_bidisco):
    with pytest.raises(DimensionError):
        evaluate(produto_bidisco, [1j])


def test_avaliacao_vetorizada_coincide(rng):
    p = _aleatorio(rng, 3, 5)
    Z = rng.standard_normal((20, 3)) + 1j * rng.standard_normal((20, 3))
    esperado = np.array([evaluate(p, z) for z in Z])
    assert_allclose(evaluate_many(p, Z), esperado, rtol=1e-12, atol=1e-12)


# ----------------------------------------------------------------------
# Derivadas
# ----------------------------------------------------------------------

def test_derivada_parcial_de_monomio(z1z2):
    assert partial_derivative(z1z2, 0) == MultiPoly.variable(2, 1)


def test_derivada_em_zero_e_c1():
    p = MultiPoly.from_coeffs_1d([1, 0.3 - 2j, 5])
    assert evaluate(partial_derivative(p, 0), [0]) == 0.3 - 2j


def test_derivada_mista():
    p = MultiPoly(2, {(0, 0): 1, (1, 0): 1, (1, 1): 1, (0, 2): 3})
    assert partial_derivative(partial_derivative(p, 0), 1).constant_term == 1


def test_derivada_indice_fora(z1z2):
    with pytest.raises(DimensionError):
        partial_derivative(z1z2, 2)


def test_derivada_linear(rng):
    p, q = _aleatorio(rng, 2, 4), _aleatorio(rng, 2, 4)
    for j in range(2):
        soma = partial_derivative(p + q, j)
        separadas = partial_derivative(p, j) + partial_derivative(q, j)
        assert soma.almost_equal(separadas, 1e-12)


def test_diferencas_finitas(rng):
    h = 1e-5
    for _ in range(20):
        n = int(rng.integers(1, 4))
        p = _aleatorio(rng, n, 5)
        z = 0.5 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        for j in range(n):
            passo = np.zeros(n)
            passo[j] = h
            numerica = (evaluate(p, z + passo) - evaluate(p, z - passo)) / (2 * h)
            assert abs(numerica - evaluate(partial_derivative(p, j), z)) <= 1e-5


def test_gradiente_em_zero(produto_bidisco):
    assert_allclose(gradient_at_zero(MultiPoly.constant(2)), [0, 0])
    assert_allclose(gradient_at_zero(MultiPoly.linear(1, [2, -1j])), [2, -1j])
    assert_allclose(gradient_at_zero(produto_bidisco), [1, 1])


def test_hessiana_em_zero(produto_bidisco):
    assert_allclose(hessian_at_zero(MultiPoly.constant(2)), np.zeros((2, 2)))
    p = MultiPoly(2, {(0, 0): 1, (1, 0): 1, (1, 1): 1, (0, 2): 3})
    assert_allclose(hessian_at_zero(p), [[0, 1], [1, 6]])
    assert_allclose(hessian_at_zero(produto_bidisco), [[0, 1], [1, 0]])


# ----------------------------------------------------------------------
# Expansão homogénea
# ----------------------------------------------------------------------

def test_partes_homogeneas():
    p = MultiPoly(2, {(1, 1): 1, (3, 0): 1})
    h = homogeneous_parts(p)
    assert h.vanishing_order == 2
    assert h.part(2) == MultiPoly(2, {(1, 1): 1})
    assert h.part(3) == MultiPoly(2, {(3, 0): 1})
    assert h.reassemble() == p


def test_partes_homogeneas_ordem_zero():
    h = homogeneous_parts(MultiPoly.linear(1, [1, 0]))
    assert h.vanishing_order == 0
    assert [g for g, _ in h.parts] == [0, 1]


def test_partes_homogeneas_termo_unico():
    h = homogeneous_parts(MultiPoly(2, {(2, 1): 1}))
    assert h.vanishing_order == 3
    assert homog_data_at_ones(h, 3)[0] == 1


def test_partes_homogeneas_descartam_ruido():
    p = MultiPoly(2, {(0, 0): 1e-11, (1, 1): 1})
    assert homogeneous_parts(p).vanishing_order == 2


def test_partes_pequenas_depois_da_ordem_sao_mantidas():
    p = MultiPoly(1, {(0,): 1, (1,): 1e-10, (2,): 1})
    h = homogeneous_parts(p)
    assert h.vanishing_order == 0
    assert [g for g, _ in h.parts] == [0, 1, 2]
    assert h.part(1).coefficient((1,)) == 1e-10
    assert h.reassemble() == p


def test_ruido_na_ordem_fica_na_reconstrucao():
    p = MultiPoly(2, {(0, 0): 1e-11, (1, 0): 3e-10, (1, 1): 1, (2, 1): 2})
    h = homogeneous_parts(p)
    assert h.vanishing_order == 2
    assert h.reassemble() == p


def test_partes_homogeneas_do_polinomio_nulo():
    with pytest.raises(HypothesisError):
        homogeneous_parts(MultiPoly(2))


def test_reconstrucao_exata(rng):
    p = _aleatorio(rng, 3, 5)
    assert homogeneous_parts(p, zero_tol=0.0).reassemble() == p


def test_dados_em_uns(z1z2):
    valor, gradiente = homog_data_at_ones(homogeneous_parts(z1z2), 2)
    assert valor == 1
    assert_allclose(gradiente, [1, 1])

    h = homogeneous_parts(MultiPoly(2, {(1, 0): 2, (0, 1): -1j}))
    valor, gradiente = homog_data_at_ones(h, 1)
    assert valor == 2 - 1j
    assert_allclose(gradiente, [2, -1j])

    valor, gradiente = homog_data_at_ones(h, 5)
    assert valor == 0
    assert_allclose(gradiente, [0, 0])


# ----------------------------------------------------------------------
# Restrição a planos e transformada de Cayley
# ----------------------------------------------------------------------

def test_restricao_planos_coordenados(z1z2):
    assert restrict_to_plane(z1z2, [1, 0], [0, 1]) == z1z2


def test_restricao_diagonal():
    p = MultiPoly.linear(1, [1, 1])
    q = restrict_to_plane(p, [1, 1], [1, 1])
    assert q == MultiPoly.linear(1, [2, 2])


def test_restricao_equivalente_na_avaliacao(rng):
    p = _aleatorio(rng, 3, 4)
    u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    q = restrict_to_plane(p, u, v)
    assert q.total_degree <= p.total_degree
    for _ in range(100):
        w1, w2 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        esperado = evaluate(p, w1 * u + w2 * v)
        assert abs(evaluate(q, [w1, w2]) - esperado) <= 1e-10 * max(1.0, abs(esperado))


def test_restricao_dimensao_errada(z1z2):
    with pytest.raises(DimensionError):
        restrict_to_plane(z1z2, [1, 0, 0], [0, 1])


def test_cayley_da_constante():
    assert cayley_substitute(MultiPoly.constant(2)) == MultiPoly.constant(2)


def test_cayley_de_z1():
    q = cayley_substitute(MultiPoly.variable(2, 0))
    assert q.almost_equal(MultiPoly(2, {(0, 0): 0.5, (1, 0): 0.5}), 1e-15)


def test_cayley_ida_e_volta(produto_bidisco, rng):
    p = produto_bidisco * MultiPoly(2, {(0, 0): 1, (2, 1): 0.5 - 1j})
    n, m = bidegree(p)
    q = cayley_substitute(p)
    assert cayley_inverse_substitute(q, n, m).almost_equal(p, 1e-10)


def test_cayley_bigrau_abaixo_do_real(produto_bidisco):
    with pytest.raises(HypothesisError):
        cayley_substitute(produto_bidisco, 0, 1)


def test_cayley_bigrau_explicito_maior():
    p = MultiPoly.variable(2, 0)
    q = cayley_substitute(p, 2, 0)
    w = [0.3 + 0.1j, -0.2j]
    z1 = 1j * (1 + w[0]) / (1 - w[0])
    esperado = z1 * ((1 - w[0]) / 2j) ** 2
    assert evaluate(q, w) == pytest.approx(esperado)


def test_cayley_exige_duas_variaveis(um_mais_z):
    with pytest.raises(DimensionError):
        cayley_substitute(um_mais_z)
