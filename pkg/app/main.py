import logging
import math
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse

from app.config import configure_logging, get_settings
from app.errors import DeBruijnError, NumericalInstabilityError
from app.models import Alphabet, CyclicWord
from app.schemas import (
    DistanceMatrixRequest,
    DistanceMatrixResponse,
    EntropyRequest,
    EntropyValue,
    EntropyResponse,
    LevenshteinRequest,
    LevenshteinResponse,
    RelativeEntropyRequest,
    SpinParams,
    SpinResponse,
    TableResponse,
    W1Cell,
)
from app.services import entropy_service, similarity_service, spin_service
from app.services.entropy_service import KMode
from app.services.io_service import write_w1_table
from app.services.pipeline_service import resolve_k

# Set up logging
configure_logging()
logger = logging.getLogger(__name__)

app = FastAPI(
    title="De Bruijn Entropy Service",
    description="Euler-circuit class counts, relative entropies and alignment-free distance matrices",
    version="1.0.0",
)


def _word(text: str, alphabet: Optional[str]) -> CyclicWord:
    return CyclicWord.from_symbols(text, Alphabet.from_string(alphabet) if alphabet else None)


def _finite(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


@app.get("/health")
async def health_check():
    """Service status and active numerical settings"""
    settings = get_settings()
    return {
        "status": "healthy",
        "version": app.version,
        "dense_vertex_limit": settings.dense_vertex_limit,
        "snap_tolerance": settings.snap_tolerance,
        "comparison_tolerance": settings.comparison_tolerance,
    }


@app.post("/entropy", response_model=EntropyResponse)
async def entropy(request: EntropyRequest):
    """Order-k de Bruijn entropy of a cyclic word"""
    try:
        word = _word(request.word, request.alphabet)
        k = request.k
        if k is None:
            k = entropy_service.suggest_k(word.length, max(word.alphabet.size, 2), KMode.INFORMATIVE)
        logger.info(f"Entropy request: length={word.length}, k={k}")
        value = entropy_service.word_entropy(word, k, request.base)
        return EntropyResponse(word=request.word, k=k, entropy=value)
    except DeBruijnError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except HTTPException:
        raise
    except Exception as e:
        logger.error(f"Error in entropy: {e}")
        raise HTTPException(status_code=500, detail="Internal server error during entropy computation")


@app.post("/relative-entropy", response_model=EntropyValue)
async def relative_entropy(request: RelativeEntropyRequest):
    """Entropy of the boxminus of two words' quivers"""
    try:
        alphabet = request.alphabet or "".join(sorted(set(request.word_a) | set(request.word_b)))
        u, v = _word(request.word_a, alphabet), _word(request.word_b, alphabet)
        return entropy_service.relative_entropy(u, v, request.k)
    except DeBruijnError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except HTTPException:
        raise
    except Exception as e:
        logger.error(f"Error in relative_entropy: {e}")
        raise HTTPException(status_code=500, detail="Internal server error during relative entropy computation")


@app.post("/levenshtein", response_model=LevenshteinResponse)
async def levenshtein(request: LevenshteinRequest):
    return LevenshteinResponse(distance=similarity_service.levenshtein(request.word_a, request.word_b))


@app.get("/table", response_model=TableResponse)
async def w1_table(ell: int = Query(..., ge=1, le=512, description="Binary word length")):
    """Order-1 class sizes of binary cyclic words for every (x00, x*)"""
    try:
        cells = []
        total = 0
        for x00, xstar, log_w in entropy_service.binary_w1_grid(ell):
            count = entropy_service.snap_integer(log_w)
            cells.append(W1Cell(x00=x00, xstar=xstar, log_W=log_w, W=count))
            total = total + count if total is not None and count is not None else None
        return TableResponse(ell=ell, cells=cells, total=total)
    except DeBruijnError as e:
        raise HTTPException(status_code=400, detail=str(e))


@app.get("/table.csv", response_class=PlainTextResponse)
async def w1_table_csv(ell: int = Query(..., ge=1, le=512)):
    return write_w1_table(ell)


@app.post("/spin", response_model=SpinResponse)
async def spin(params: SpinParams, ensemble: str = Query("linear", pattern="^(linear|necklace)$")):
    """Partition function of the binary ring against its thermodynamic limit"""
    try:
        log_z = spin_service.partition_function(params, ensemble)
        log_limit = spin_service.log_thermodynamic_limit(params)
        try:
            transfer_log_z = spin_service.transfer_matrix_log_partition(params)
        except NumericalInstabilityError as e:
            logger.warning(f"Transfer matrix check skipped: {e}")
            transfer_log_z = None
        return SpinResponse(
            params=params,
            ensemble=ensemble,
            log_Z=log_z,
            log_Z_per_site=log_z / params.ell,
            log_thermodynamic_limit=log_limit,
            Z_per_site=_finite(spin_service.exp_or_inf(log_z / params.ell)),
            thermodynamic_limit=_finite(spin_service.exp_or_inf(log_limit)),
            transfer_matrix_log_Z=transfer_log_z,
        )
    except DeBruijnError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except HTTPException:
        raise
    except Exception as e:
        logger.error(f"Error in spin: {e}")
        raise HTTPException(status_code=500, detail="Internal server error during partition function computation")


@app.post("/distance-matrix", response_model=DistanceMatrixResponse)
async def distance_matrix(request: DistanceMatrixRequest, method: str = Query("average")):
    """Pairwise relative entropies of nucleotide sequences, with an average-linkage tree"""
    try:
        alphabet = Alphabet.from_string(request.alphabet)
        words = [CyclicWord.from_symbols(s.upper(), alphabet) for s in request.sequences]
        labels = request.labels or [f"seq{i + 1}" for i in range(len(words))]
        k = resolve_k(request.k if request.k is not None else "auto", words)
        logger.info(f"Distance matrix request: {len(words)} sequences, k={k}, normalize={request.normalize}")
        matrix = similarity_service.distance_matrix(words, k, request.normalize, labels)
        tree = similarity_service.linkage(matrix, method)
        return DistanceMatrixResponse(
            labels=list(matrix.labels),
            values=matrix.values.tolist(),
            k=k,
            normalized=matrix.normalized,
            fallback_pairs=[list(p) for p in matrix.fallback_pairs()],
            newick=similarity_service.newick_export(tree, list(matrix.labels)),
        )
    except DeBruijnError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except HTTPException:
        raise
    except Exception as e:
        logger.error(f"Error in distance_matrix: {e}")
        raise HTTPException(status_code=500, detail="Internal server error during distance matrix computation")


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
