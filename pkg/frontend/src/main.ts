import { LockApi } from "./api.js";
import { Panel } from "./panel.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("service") ?? "";
const mount = document.getElementById("app");
if (!mount) throw new Error("missing #app mount point");

const panel = new Panel(document, mount, new LockApi(base));
void panel.connect();
