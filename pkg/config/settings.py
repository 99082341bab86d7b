from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Linear algebra
    RANK_TOL: float = 1e-10
    SVD_DRIVER: str = "gesdd"

    # Brute-force MLE
    MLE_PERMUTATION_CAP: int = 9
    MLE_CLUSTERING_CAP: int = 6
    MLE_BATCH_SIZE: int = 40320
    MLE_TIE_RTOL: float = 1e-12

    # Threshold constants (multiplied into the level, see estimators)
    SVT_LAMBDA_FACTOR: float = 1.1
    SRLASSO_LAMBDA_FACTOR: float = 2.1

    # LevSort
    LEVSORT_TIE_TOL: float = 1e-9
    LEVSORT_CONSISTENCY_TOL: float = 1e-8

    # Flatness check
    FLATNESS_RANDOM_WITNESSES: int = 32

    # Harness
    HARNESS_WORKERS: int = 1
    CSV_FLOAT_DIGITS: int = 17

    # Application Settings
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"
    API_HOST: str = "0.0.0.0"
    API_PORT: int = 8000

    class Config:
        env_file = ".env"
        case_sensitive = True


settings = Settings()
