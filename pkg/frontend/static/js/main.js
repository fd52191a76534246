/** Browser entry point: token handling, delegated events, re-render on change. */
import { ApiClient, ApiError } from "./api.js";
import { Controller } from "./controller.js";
import { renderApp, renderLogin } from "./render.js";
const TOKEN_KEY = "hearth_token";
const app = document.getElementById("app");
let controller = null;
function render() {
    if (controller) {
        app.innerHTML = renderApp(controller.model);
    }
}
function showLogin(message) {
    controller?.stop();
    controller = null;
    app.innerHTML = renderLogin(message);
}
async function boot(token) {
    const api = new ApiClient("", token);
    controller = new Controller(api, { onChange: render });
    try {
        await controller.start();
    }
    catch (err) {
        showLogin(`cannot reach the gateway: ${err.message}`);
        return;
    }
    if (controller.model.connection === "unauthorized") {
        localStorage.removeItem(TOKEN_KEY);
        showLogin("token rejected, try again");
        return;
    }
    localStorage.setItem(TOKEN_KEY, token);
    render();
}
app.addEventListener("click", (ev) => {
    const el = ev.target.closest("[data-action]");
    if (!el || !controller) {
        return;
    }
    const action = el.dataset.action;
    if (action === "toggle-light" && el.dataset.device) {
        void controller.toggleLight(el.dataset.device);
    }
    else if (action === "set-mode" && el.dataset.mode) {
        void controller.setMode(el.dataset.mode.toUpperCase());
    }
    else if (action === "ack" && el.dataset.id) {
        void controller.ack(Number(el.dataset.id));
    }
});
app.addEventListener("submit", (ev) => {
    const form = ev.target;
    if (form.dataset.action === "login") {
        ev.preventDefault();
        const token = form.elements.namedItem("token").value.trim();
        if (token) {
            void boot(token);
        }
    }
});
const saved = localStorage.getItem(TOKEN_KEY);
if (saved) {
    void boot(saved);
}
else {
    app.innerHTML = renderLogin("enter the gateway API token");
}
export { boot, ApiError };
