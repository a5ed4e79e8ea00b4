import { ApiClient } from "./api.js";
import { Explorer } from "./app.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app element");

const api = new ApiClient("");
const explorer = new Explorer(root, api, {
  fragment: window.location.hash,
  onFragmentChange: (fragment) => {
    history.replaceState(null, "", `#${fragment}`);
  },
});

window.addEventListener("hashchange", () => {
  window.location.reload();
});

explorer.init().catch((err) => {
  root.textContent = `failed to reach the tile service: ${err}`;
});
