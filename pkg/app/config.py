"""Application configuration"""
import os
from typing import List, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from config.config_loader import get_config

config_loader = get_config()


class SolverSettings(BaseModel):
    """Conjugate gradient and dense oracle settings"""
    cg_tol: float = Field(default=1e-12, gt=0.0, lt=1.0)
    iteration_factor: int = Field(default=10, ge=1)
    min_iterations: int = Field(default=10000, ge=1)
    dense_limit: int = Field(default=5000, ge=1)
    pivot_ratio: float = Field(default=1e-14, gt=0.0, lt=1.0)


class QuadratureSettings(BaseModel):
    """Gauss degrees of the non-lumped integrals"""
    rhs_degree: int = Field(default=6, ge=5)
    error_degree: int = Field(default=6, ge=5)
    exact_mass_degree: int = Field(default=8, ge=4)
    postprocess_degree: int = Field(default=6, ge=5)


class StudySettings(BaseModel):
    """Default refinement ranges and output location"""
    levels_2d: Tuple[int, int] = (1, 4)
    levels_3d: Tuple[int, int] = (0, 2)
    results_dir: str = "results"
    postprocess_degree: int = Field(default=2, ge=1, le=2)

    @field_validator("levels_2d", "levels_3d")
    @classmethod
    def _increasing(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        low, high = value
        if low < 0 or high <= low:
            raise ValueError(f"level range must satisfy 0 <= low < high, got {value}")
        return value

    def levels(self, dim: int) -> List[int]:
        low, high = self.levels_2d if dim == 2 else self.levels_3d
        return list(range(low, high + 1))


class DatabaseSettings(BaseModel):
    enabled: bool = False
    url: str = "sqlite:///results/studies.db"

    @model_validator(mode="after")
    def _url_present(self) -> "DatabaseSettings":
        if self.enabled and not self.url:
            raise ValueError("database.url is required when recording is enabled")
        return self


class Config:
    """Base configuration"""
    APP_NAME = config_loader.get('app.name', 'mfem-lumped')
    APP_VERSION = config_loader.get('app.version', '1.0.0')

    SOLVER = SolverSettings(**(config_loader.get('solver', {}) or {}))
    QUADRATURE = QuadratureSettings(**(config_loader.get('quadrature', {}) or {}))
    STUDY = StudySettings(
        **(config_loader.get('study', {}) or {}),
        postprocess_degree=config_loader.get('postprocess.degree', 2),
    )
    DATABASE = DatabaseSettings(**(config_loader.get('database', {}) or {}))

    AFFINE_TOL = float(config_loader.get('mesh.affine_tol', 1e-10))
    CONFORMITY_TOL = float(config_loader.get('mesh.conformity_tol', 1e-10))

    LOG_LEVEL = os.getenv('MFEM_LOG_LEVEL', config_loader.get('logging.root.level', 'INFO'))
    LOGGING = config_loader.get('logging', {})

    DEBUG = False
    TESTING = False


class DevelopmentConfig(Config):
    """Development configuration"""
    DEBUG = True


class ProductionConfig(Config):
    """Production configuration"""
    DEBUG = False


class TestingConfig(Config):
    """Testing configuration"""
    TESTING = True
    DATABASE = DatabaseSettings(enabled=False, url='sqlite:///:memory:')


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_app_config(config_name=None):
    """Get configuration class based on environment"""
    if config_name is None:
        config_name = os.getenv('MFEM_ENV', 'development')
    return config.get(config_name, DevelopmentConfig)
