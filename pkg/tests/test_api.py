# tests/test_api.py
import math

import pytest
from httpx import ASGITransport, AsyncClient

from app.main import app


@pytest.fixture
async def client():
    """Create test client against the ASGI app"""
    async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as ac:
        yield ac


@pytest.mark.asyncio
async def test_health_check(client):
    """Test health check endpoint"""
    response = await client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


@pytest.mark.asyncio
async def test_entropy_endpoint(client):
    """Test entropy of ABRACADABRA"""
    response = await client.post("/entropy", json={"word": "ABRACADABRA", "k": 1, "alphabet": "ABCDR"})
    assert response.status_code == 200
    body = response.json()
    assert body["entropy"]["count"] == 12
    assert body["entropy"]["nats"] == pytest.approx(math.log(12))


@pytest.mark.asyncio
async def test_entropy_defaults_k(client):
    """Test entropy with the informative order heuristic"""
    response = await client.post("/entropy", json={"word": "0110100110010110"})
    assert response.status_code == 200
    assert response.json()["k"] == 4


@pytest.mark.asyncio
async def test_entropy_invalid_order(client):
    """Test entropy with k beyond the word length"""
    response = await client.post("/entropy", json={"word": "ABC", "k": 5})
    assert response.status_code == 400
    assert "Order" in response.json()["detail"]


@pytest.mark.asyncio
async def test_entropy_missing_word(client):
    """Test entropy endpoint with missing body fields"""
    response = await client.post("/entropy", json={"k": 1})
    assert response.status_code == 422


@pytest.mark.asyncio
async def test_relative_entropy_endpoint(client):
    """Test relative entropy of two words at edit distance five"""
    response = await client.post("/relative-entropy", json={"word_a": "ABRACADABRA", "word_b": "ABARACARBAD"})
    assert response.status_code == 200
    assert response.json()["nats"] == 0.0


@pytest.mark.asyncio
async def test_levenshtein_endpoint(client):
    """Test edit distance endpoint"""
    response = await client.post("/levenshtein", json={"word_a": "ABRACADABRA", "word_b": "ABARACARBAD"})
    assert response.status_code == 200
    assert response.json()["distance"] == 5


@pytest.mark.asyncio
async def test_table_endpoint(client):
    """Test binary class-size table"""
    response = await client.get("/table?ell=16")
    assert response.status_code == 200
    body = response.json()
    assert body["total"] == 4116
    cells = {(c["x00"], c["xstar"]): c["W"] for c in body["cells"]}
    assert cells[(4, 4)] == 309


@pytest.mark.asyncio
async def test_table_csv_endpoint(client):
    """Test table CSV rendering"""
    response = await client.get("/table.csv?ell=8")
    assert response.status_code == 200
    assert response.text.startswith("xstar,0,1,2")


@pytest.mark.asyncio
async def test_table_missing_params(client):
    """Test table endpoint with missing parameters"""
    response = await client.get("/table")
    assert response.status_code == 422


@pytest.mark.asyncio
async def test_spin_endpoint(client):
    """Test infinite-temperature partition function"""
    response = await client.post("/spin", json={"J": 0.5, "K": 0.2, "beta": 0.0, "ell": 8})
    assert response.status_code == 200
    body = response.json()
    assert body["log_Z"] == pytest.approx(8 * math.log(2))
    assert body["transfer_matrix_log_Z"] == pytest.approx(8 * math.log(2))


@pytest.mark.asyncio
async def test_spin_endpoint_strong_coupling(client):
    """Test partition function when per-site values overflow"""
    response = await client.post("/spin", json={"J": 1.0, "beta": 1000.0, "ell": 8})
    assert response.status_code == 200
    body = response.json()
    assert body["Z_per_site"] is None
    assert body["thermodynamic_limit"] is None
    assert body["log_thermodynamic_limit"] == pytest.approx(1000.0)
    assert body["log_Z_per_site"] == pytest.approx(1000 + math.log(2) / 8)
    assert body["transfer_matrix_log_Z"] == pytest.approx(8000 + math.log(2))


@pytest.mark.asyncio
async def test_distance_matrix_endpoint(client):
    """Test corpus distance matrix with a tree"""
    payload = {
        "sequences": ["ACACACCAACCACAACACCA", "ACACACCAACCACAACACCC", "GTGTTGGTTGTGGTGTTTGG"],
        "labels": ["a1", "a2", "b"],
        "k": 2,
    }
    response = await client.post("/distance-matrix", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert body["labels"] == ["a1", "a2", "b"]
    assert body["values"][0][0] == 0.0
    assert body["values"][0][2] == body["values"][2][0]
    assert body["newick"].endswith(";")


@pytest.mark.asyncio
async def test_distance_matrix_rejects_foreign_symbols(client):
    """Test distance matrix with symbols outside the alphabet"""
    response = await client.post("/distance-matrix", json={"sequences": ["ACGT", "ACXT"], "k": 1})
    assert response.status_code == 400
