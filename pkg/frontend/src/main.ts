import { ApiClient } from "./api.js";
import { SessionController } from "./controller.js";
import { bind, renderHtml } from "./view.js";

function mount(root: HTMLElement): SessionController {
    const api = new ApiClient("");
    const controller = new SessionController(api);
    bind(root, controller);
    controller.subscribe((state) => {
        // full re-render; keep focus/caret on the active control
        const active = document.activeElement as HTMLInputElement | null;
        const action = active?.dataset?.action;
        const caret = active && "selectionStart" in active ? active.selectionStart : null;
        root.innerHTML = renderHtml(state, controller);
        if (action) {
            const again = root.querySelector<HTMLInputElement>(
                `[data-action="${action}"]`,
            );
            if (again) {
                again.focus();
                if (caret !== null && typeof again.setSelectionRange === "function") {
                    try {
                        again.setSelectionRange(caret, caret);
                    } catch {
                        /* non-text inputs */
                    }
                }
            }
        }
    });
    void controller.loadFindings();
    return controller;
}

const root = document.getElementById("app");
if (root) mount(root);

export { mount };
