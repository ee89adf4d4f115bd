# DEV TOOL: local graph helper for UI (http://127.0.0.1:7777)

from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.middleware.cors import CORSMiddleware
import uvicorn

from src.decompose import decompose_multicast, dump_decomposition, multicast_rate
from src.errors import RtncError
from src.graph_core import compute_metrics, parse_graph, split_relays

app = FastAPI()

app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:5173"],
    allow_credentials=False,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.post("/graph-file")
async def graph_file(
    sources: str = Form(""),
    file: UploadFile = File(...)
):
    text = (await file.read()).decode("utf-8", errors="replace")
    chosen = [int(s) for s in sources.split(",") if s.strip()] or None

    try:
        g = split_relays(parse_graph(text, chosen))
        metrics = compute_metrics(g)
        d = decompose_multicast(g) if len(g.sources) == 3 else None
    except (RtncError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))

    return {
        "source": file.filename or "upload",
        "nodes": len(g.wireless.nodes),
        "edges": len(g.wireless.edges),
        "h": metrics.h,
        "max_distance": metrics.max_distance,
        "rate": str(multicast_rate(d)) if d else None,
        "dump": dump_decomposition(d) if d else None,
        "status": "ready",
    }


if __name__ == "__main__":
    uvicorn.run(app, host="127.0.0.1", port=7777)
