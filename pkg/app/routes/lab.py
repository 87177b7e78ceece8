import logging
from typing import Any, Dict, List, Literal, Optional

from fastapi import APIRouter
from fastapi.concurrency import run_in_threadpool
from pydantic import BaseModel

from app.config import LAB_GRID_K
from app.errors import INVALID_DATASET, LabError
from app.flows import lab
from app.flows.scenarios import build_scenario
from app.storage.redis_store import get_report, report_key, save_report
from app.tools.theory import BoundParams
from app.tools.world import Dataset, World, parse_world, serialize_world

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/lab", tags=["lab"])


class DatasetItem(BaseModel):
    point: str
    label: Literal[-1, 1]


class WorldRequest(BaseModel):
    world: Dict[str, Any]


class PairRequest(WorldRequest):
    pair: Optional[List[str]] = None


class RiskRequest(WorldRequest):
    mixture: Optional[str] = None
    dataset: Optional[List[DatasetItem]] = None


class ConditionsRequest(WorldRequest):
    grid_k: int = LAB_GRID_K


class BoundsRequest(BaseModel):
    n: int
    delta: float = 0.05
    d: int = 1
    B: float = 1.0
    X: float = 1.0
    u_star: float = 0.0
    class_size: Optional[int] = None
    C: float = 1.0


def _dataset(world: World, items: List[DatasetItem]) -> Dataset:
    index = {p.id: i for i, p in enumerate(world.points)}
    unknown = [it.point for it in items if it.point not in index]
    if unknown:
        raise LabError(INVALID_DATASET, f"unknown point id(s): {', '.join(unknown[:5])}")
    return Dataset(points=[index[it.point] for it in items], labels=[it.label for it in items])


@router.post("/validate")
def validate(req: WorldRequest):
    return lab.validate_document(req.world)


@router.post("/sets")
def sets(req: PairRequest):
    return lab.sets(parse_world(req.world), req.pair)


@router.post("/risk")
def risk(req: RiskRequest):
    world = parse_world(req.world)
    dataset = _dataset(world, req.dataset) if req.dataset is not None else None
    return lab.risks(world, req.mixture, dataset)


@router.post("/decompose")
def decompose(req: PairRequest):
    return lab.decompose(parse_world(req.world), req.pair)


@router.post("/check-conditions")
async def check_conditions(req: ConditionsRequest):
    key = report_key("conditions", req.model_dump())
    cached = await get_report(key)
    if cached is not None:
        return cached
    world = parse_world(req.world)
    report = await run_in_threadpool(lab.check_conditions, world, req.grid_k)
    await save_report(key, report)
    return report


@router.post("/bounds")
def bounds(req: BoundsRequest):
    return {"bounds": lab.bounds(BoundParams(**req.model_dump()))}


@router.get("/scenario/{name}")
async def scenario(name: str):
    key = report_key("scenario", {"name": name})
    cached = await get_report(key)
    if cached is not None:
        return cached
    world, _ = await run_in_threadpool(build_scenario, name)
    doc = serialize_world(world)
    await save_report(key, doc)
    return doc
