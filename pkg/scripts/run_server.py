#!/usr/bin/env python3
"""
Script to run the permuted linear model API server
"""
import uvicorn
import sys
import os

# Add the parent directory to the path so we can import our modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config.settings import settings


def main():
    """Run the FastAPI server"""
    print("Starting permuted linear model server...")
    print(f"API Docs: http://localhost:{settings.API_PORT}/docs")
    print(f"Health Check: http://localhost:{settings.API_PORT}/health")
    print("\n" + "=" * 50)

    uvicorn.run(
        "main:app",
        host=settings.API_HOST,
        port=settings.API_PORT,
        reload=settings.DEBUG,
        log_level=settings.LOG_LEVEL.lower(),
    )


if __name__ == "__main__":
    main()
