"""
FastAPI wrapper exposing the tree calculus over HTTP
Run this to serve the same operations as the command-line tool
"""

import logging
from typing import List, Optional

from fastapi import FastAPI, UploadFile, File, Form, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from dotenv import load_dotenv
from pydantic import BaseModel

from certify import certify_half_grope, certify_height, certify_k_slice, verify_certificate
from cli import parse_prefer, read_expression
from errors import BracketSyntaxError, GropeTowerError, PreconditionError
from grope import CappedGrope
from hybrid import grope_to_tower, tower_to_grope
from oracle import enumerate_brackets, enumerate_unrooted
from rewrite import ihx_rewrite, ihx_site_for_edge, normalize_right_normed, normalize_simple
from tower import RawTower, SplitTower, extract_split
from trees import degree, parse_bracket, parse_tree
from utils import decode_payload, validate_upload

load_dotenv()

logger = logging.getLogger(__name__)

app = FastAPI(
    title="Grope Tower API",
    description="Tree calculus of gropes and Whitney towers",
    version="0.1.0"
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)


class Expression(BaseModel):
    expr: str
    rooted: bool = False
    edge: Optional[int] = None


@app.exception_handler(GropeTowerError)
async def library_error(request, exc: GropeTowerError):
    status = 422 if isinstance(exc, PreconditionError) else 400
    logger.info("%s on %s: %s", type(exc).__name__, request.url.path, exc)
    content = {"error": str(exc), "type": type(exc).__name__}
    if isinstance(exc, BracketSyntaxError):
        content["offset"] = exc.offset
    return JSONResponse(status_code=status, content=content)


async def _read_upload(file: UploadFile, *kinds: str):
    content = await file.read()
    check = validate_upload(file.filename or "payload.json", len(content))
    if not check['valid']:
        return None, JSONResponse(status_code=400, content={"error": check['message']})
    return decode_payload(content, *kinds), None


@app.get("/")
async def root():
    return {
        "name": "Grope Tower API",
        "version": "0.1.0",
        "status": "running"
    }


@app.get("/health")
async def health():
    return {"status": "healthy"}


@app.post("/degree")
async def get_degree(body: Expression):
    return {"degree": degree(read_expression(body.expr))}


@app.post("/normalize")
async def normalize(body: Expression):
    if body.rooted:
        return {"trees": [b.key for b in normalize_right_normed(parse_bracket(body.expr))]}
    return {"trees": [t.canonical_key for t in normalize_simple(parse_tree(body.expr))]}


@app.post("/ihx")
async def ihx(body: Expression):
    if body.edge is None:
        return JSONResponse(status_code=400, content={"error": "An edge index is required"})
    t = parse_tree(body.expr)
    site = ihx_site_for_edge(t, body.edge)
    return {
        "tree": t.canonical_key,
        "site": site.to_json(),
        "outputs": [o.canonical_key for o in ihx_rewrite(t, site)],
    }


@app.post("/convert/grope-to-tower")
async def convert_grope(file: UploadFile = File(...)):
    data, error = await _read_upload(file, "grope")
    if error:
        return error
    return grope_to_tower(CappedGrope.from_json(data)).to_json()


@app.post("/convert/tower-to-grope")
async def convert_tower(file: UploadFile = File(...), prefer: Optional[str] = Form(None)):
    data, error = await _read_upload(file, "tower", "raw-tower")
    if error:
        return error
    tower = extract_split(RawTower.from_json(data)) if "points" in data else SplitTower.from_json(data)
    return tower_to_grope(tower, parse_prefer(prefer)).to_json()


@app.post("/certify/{kind}")
async def certify(kind: str, file: UploadFile = File(...), k: int = Form(1)):
    """Certify a grope as height, half-grope or k-slice"""
    data, error = await _read_upload(file, "grope")
    if error:
        return error
    grope = CappedGrope.from_json(data)
    if kind == "height":
        return certify_height(grope).to_json()
    if kind == "half-grope":
        return certify_half_grope(grope).to_json()
    if kind == "k-slice":
        return certify_k_slice(grope, k).to_json()
    return JSONResponse(status_code=404, content={"error": f"Unknown certificate kind '{kind}'"})


@app.post("/verify")
async def verify(file: UploadFile = File(...)):
    data, error = await _read_upload(file, "certificate")
    if error:
        return error
    return verify_certificate(data).to_json()


@app.get("/enumerate")
async def enumerate_trees(leaves: str = Query(...), unrooted: bool = False):
    labels: List[str] = [label.strip() for label in leaves.split(",") if label.strip()]
    if unrooted:
        keys = [t.canonical_key for t in enumerate_unrooted(labels)]
    else:
        keys = [b.key for b in enumerate_brackets(labels)]
    return {"count": len(keys), "trees": keys}


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
