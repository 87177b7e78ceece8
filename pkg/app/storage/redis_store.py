import hashlib
import json
import logging
from typing import Any, Dict, Optional

from app.config import LAB_REPORT_TTL, REDIS_URL

logger = logging.getLogger(__name__)

# The service runs without a cache when REDIS_URL isn't set.
redis_client = None

if REDIS_URL:
    import redis.asyncio as redis  # type: ignore
    redis_client = redis.from_url(REDIS_URL, decode_responses=True)


def report_key(kind: str, payload: Dict[str, Any]) -> str:
    digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()
    return f"lab:{kind}:{digest}"


async def save_report(key: str, report: Dict[str, Any], ttl_seconds: Optional[int] = LAB_REPORT_TTL) -> None:
    if not redis_client:
        return
    payload = json.dumps(report, sort_keys=True)
    try:
        if ttl_seconds:
            await redis_client.set(key, payload, ex=ttl_seconds)
        else:
            await redis_client.set(key, payload)
    except Exception:
        logger.exception("could not cache report %s", key)


async def get_report(key: str) -> Optional[Dict[str, Any]]:
    if not redis_client:
        return None
    try:
        raw = await redis_client.get(key)
    except Exception:
        logger.exception("could not read cached report %s", key)
        return None
    if not raw:
        return None
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return None


async def cached_report_counts() -> Dict[str, int]:
    """Number of cached reports per kind (the middle part of lab:{kind}:{digest})."""
    counts: Dict[str, int] = {}
    if not redis_client:
        return counts
    async for key in redis_client.scan_iter(match="lab:*"):
        kind = key.split(":")[1]
        counts[kind] = counts.get(kind, 0) + 1
    return dict(sorted(counts.items()))
