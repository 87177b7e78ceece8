from dotenv import load_dotenv
load_dotenv()
import logging

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from app.config import ENV, LOG_LEVEL
from app.errors import LabError
from app.routes.lab import router as lab_router

logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
logger = logging.getLogger(__name__)

app = FastAPI(title="strategic-lab")

# Routers
app.include_router(lab_router)


@app.exception_handler(LabError)
async def lab_error_handler(request: Request, exc: LabError):
    logger.info("%s %s -> %s", request.method, request.url.path, exc.code)
    return JSONResponse(status_code=422, content=exc.to_dict())


# Health check
@app.get("/")
def health():
    return {"status": "ok", "service": "strategic-lab", "env": ENV}

from app.routes.store_debug import router as store_debug_router
app.include_router(store_debug_router)
