from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
import logging
import uvicorn

from config.settings import settings
from routers import denoise, experiments

logging.basicConfig(level=settings.LOG_LEVEL)

app = FastAPI(
    title="Permuted Linear Model API",
    description="Denoising estimators and Monte-Carlo harness for the permuted linear model",
    version="1.0.0",
    debug=settings.DEBUG,
)

# CORS middleware for frontend integration
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(denoise.router, prefix="/api", tags=["denoise"])
app.include_router(experiments.router, prefix="/api", tags=["experiments"])


@app.get("/health")
async def health_check():
    return {"status": "healthy", "service": "permuted-linear-model"}


if __name__ == "__main__":
    uvicorn.run("main:app", host=settings.API_HOST, port=settings.API_PORT, reload=True)
