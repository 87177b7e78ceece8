import os

ENV = os.getenv("ENV", "dev")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

REDIS_URL = os.getenv("REDIS_URL")
LAB_REPORT_TTL = int(os.getenv("LAB_REPORT_TTL", "3600"))

# Search / estimation defaults
LAB_GRID_K = int(os.getenv("LAB_GRID_K", "10"))
LAB_GRID_CAP = int(os.getenv("LAB_GRID_CAP", "1000000"))
LAB_SIGMA_DRAWS = int(os.getenv("LAB_SIGMA_DRAWS", "1000"))
LAB_DATASET_DRAWS = int(os.getenv("LAB_DATASET_DRAWS", "20"))
