import { ArenaClient } from "./api.js";
import { mountApp } from "./ui.js";

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app mount point");

// same-origin deployment: the service serves /v1 next to this page
const app = mountApp(new ArenaClient(""), root);
void app.showTab("battle");
