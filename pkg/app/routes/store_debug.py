from fastapi import APIRouter

from app.config import LAB_REPORT_TTL
from app.storage import redis_store

router = APIRouter()


@router.get("/debug/store")
async def debug_store():
    """Which lab reports are cached right now, counted by kind."""
    if not redis_store.redis_client:
        return {"ok": False, "error": "report cache disabled (REDIS_URL not set)"}
    try:
        reports = await redis_store.cached_report_counts()
    except Exception as e:
        return {"ok": False, "error": str(e)}
    return {"ok": True, "ttl_seconds": LAB_REPORT_TTL, "reports": reports, "total": sum(reports.values())}
