from sqlalchemy import create_engine
from sqlalchemy.orm import DeclarativeBase, sessionmaker

from src.config import DATABASE_URL


def normalize_url(url: str) -> str:
    if url.startswith("postgres://"):
        return url.replace("postgres://", "postgresql+psycopg://", 1)
    if url.startswith("postgresql://"):
        return url.replace("postgresql://", "postgresql+psycopg://", 1)
    return url


normalized_url = normalize_url(DATABASE_URL)

engine = create_engine(normalized_url, future=True, pool_pre_ping=True)

SessionLocal = sessionmaker(bind=engine, autoflush=False, autocommit=False)


class Base(DeclarativeBase):
    pass


def init_db(bind=None):
    # models must be imported so their tables are registered on Base
    import src.models  # noqa: F401

    Base.metadata.create_all(bind=bind or engine)
    print("🗄️ Database schema initialized.")
