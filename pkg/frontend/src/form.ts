/** Build a patient-attribute form from a model descriptor.
 *
 * One input per raw field: selects for categorical fields (options come
 * from the descriptor), validated number inputs for numeric fields, free
 * text for geo fields (county code or address).
 */

import type { FieldDescriptor, ModelDescriptor } from "./types.js";

export interface ModelForm {
  element: HTMLFormElement;
  /** Attribute map for submission; throws FormValidationError when invalid. */
  read(): Record<string, string | number>;
  setFieldError(field: string, message: string): void;
  clearErrors(): void;
}

export class FormValidationError extends Error {
  constructor(readonly fields: { field: string; message: string }[]) {
    super(fields.map((f) => `${f.field}: ${f.message}`).join("; "));
  }
}

function controlId(name: string): string {
  return `field-${name.replace(/[^a-zA-Z0-9]+/g, "-")}`;
}

function buildControl(field: FieldDescriptor): HTMLElement {
  if (field.kind === "nominal") {
    const select = document.createElement("select");
    select.id = controlId(field.name);
    select.name = field.name;
    for (const category of field.categories ?? []) {
      const option = document.createElement("option");
      option.value = category;
      option.textContent = category;
      select.appendChild(option);
    }
    return select;
  }
  const input = document.createElement("input");
  input.id = controlId(field.name);
  input.name = field.name;
  if (field.kind === "numeric") {
    input.type = "number";
    input.step = "any";
    input.required = true;
  } else {
    input.type = "text"; // geo: county code or free-text address
    input.required = true;
    input.placeholder = "county code or address";
  }
  return input;
}

export function renderModelForm(descriptor: ModelDescriptor, container: HTMLElement): ModelForm {
  const form = document.createElement("form");
  form.className = "model-form";
  form.dataset.modelId = descriptor.model_id;
  form.addEventListener("submit", (event) => event.preventDefault());

  const controls = new Map<string, HTMLInputElement | HTMLSelectElement>();
  const errorSlots = new Map<string, HTMLElement>();

  for (const field of descriptor.fields) {
    const row = document.createElement("div");
    row.className = "form-row";
    const label = document.createElement("label");
    label.htmlFor = controlId(field.name);
    label.textContent = field.name;
    const control = buildControl(field) as HTMLInputElement | HTMLSelectElement;
    const error = document.createElement("span");
    error.className = "field-error";
    error.id = `${controlId(field.name)}-error`;
    row.append(label, control, error);
    form.appendChild(row);
    controls.set(field.name, control);
    errorSlots.set(field.name, error);
  }

  container.replaceChildren(form);

  const clearErrors = () => {
    for (const slot of errorSlots.values()) {
      slot.textContent = "";
    }
  };

  return {
    element: form,
    read() {
      clearErrors();
      const attributes: Record<string, string | number> = {};
      const problems: { field: string; message: string }[] = [];
      for (const field of descriptor.fields) {
        const control = controls.get(field.name)!;
        const raw = control.value.trim();
        if (field.kind === "numeric") {
          const value = Number(raw);
          if (raw === "" || !Number.isFinite(value)) {
            problems.push({ field: field.name, message: "enter a number" });
            continue;
          }
          attributes[field.name] = value;
        } else {
          if (raw === "") {
            problems.push({ field: field.name, message: "required" });
            continue;
          }
          attributes[field.name] = raw;
        }
      }
      if (problems.length) {
        for (const p of problems) {
          errorSlots.get(p.field)!.textContent = p.message;
        }
        throw new FormValidationError(problems);
      }
      return attributes;
    },
    setFieldError(field, message) {
      const slot = errorSlots.get(field);
      if (slot) {
        slot.textContent = message;
      }
    },
    clearErrors,
  };
}
